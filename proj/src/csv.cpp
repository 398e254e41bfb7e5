#include "pic/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace pic::csv {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{})
        throw std::runtime_error("csv::num: to_chars failed");
    return std::string(buf, res.ptr);
}

std::string num(std::int64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{})
        throw std::runtime_error("csv::num: to_chars failed");
    return std::string(buf, res.ptr);
}

std::string num(std::uint64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{})
        throw std::runtime_error("csv::num: to_chars failed");
    return std::string(buf, res.ptr);
}

std::string num(int v) { return num(static_cast<std::int64_t>(v)); }

Writer::Writer(const std::filesystem::path& path) : path_(path) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw std::runtime_error("csv: failed to open " + path.string() + " for writing");
}

void Writer::comment(const std::string& text) {
    out_ << "# " << text << "\n";
    if (!out_) throw std::runtime_error("csv: write failed on " + path_.string());
}

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << "\n";
    if (!out_) throw std::runtime_error("csv: write failed on " + path_.string());
}

}  // namespace pic::csv
