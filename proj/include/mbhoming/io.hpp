#pragma once

// File output helpers. Every artifact is written to a temporary sibling and
// renamed into place, so a reader never sees a half-written file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mbhoming/error.hpp"
#include "mbhoming/format.hpp"

namespace mbhoming {

inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Comma-separated table built in memory. Doubles print with 6 decimals, which
// keeps files byte-stable and diffable.
class Csv {
public:
    explicit Csv(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (const auto h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
        columns_ = header.size();
    }

    Csv& operator<<(double v) { return cell(fmt_fixed(v, decimals_)); }
    Csv& operator<<(int v) { return cell(std::to_string(v)); }
    Csv& operator<<(long v) { return cell(std::to_string(v)); }
    Csv& operator<<(unsigned long v) { return cell(std::to_string(v)); }
    Csv& operator<<(unsigned long long v) { return cell(std::to_string(v)); }
    Csv& operator<<(bool v) { return cell(v ? "1" : "0"); }
    Csv& operator<<(std::string_view v) { return cell(v); }
    Csv& operator<<(const char* v) { return cell(v); }

    Csv& set_decimals(int d) {
        decimals_ = d;
        return *this;
    }

    const std::string& str() const { return text_; }
    std::size_t rows() const { return rows_; }

private:
    Csv& cell(std::string_view s) {
        if (col_ > 0) text_ += ',';
        text_ += s;
        if (++col_ == columns_) {
            text_ += '\n';
            col_ = 0;
            ++rows_;
        }
        return *this;
    }

    std::string text_;
    std::size_t columns_ = 0;
    std::size_t col_ = 0;
    std::size_t rows_ = 0;
    int decimals_ = 6;
};

} // namespace mbhoming
