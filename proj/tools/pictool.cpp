#include "pic/cli.hpp"

int main(int argc, char** argv) { return pic::run_cli(argc, argv); }
