#include "normpred/text_io.hpp"

#include <zlib.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "normpred/errors.hpp"

namespace normpred {

LineReader::LineReader(const std::string& path) : path_(path), buf_(1 << 16) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) {
        throw DataError("cannot open file: " + path + " (" + std::strerror(errno) + ")");
    }
    gzbuffer(f, 1 << 18);
    gz_ = f;
}

LineReader::~LineReader() {
    if (gz_ != nullptr) gzclose(static_cast<gzFile>(gz_));
}

bool LineReader::next(std::string& line) {
    gzFile f = static_cast<gzFile>(gz_);
    line.clear();
    bool got_any = false;
    for (;;) {
        if (gzgets(f, buf_.data(), static_cast<int>(buf_.size())) == nullptr) {
            if (!got_any) {
                int errnum = 0;
                const char* msg = gzerror(f, &errnum);
                if (errnum != Z_OK && errnum != Z_STREAM_END) {
                    throw DataError("read error in " + path_ + ": " + msg);
                }
            }
            return got_any;
        }
        got_any = true;
        const std::size_t len = std::strlen(buf_.data());
        line.append(buf_.data(), len);
        if (len > 0 && buf_[len - 1] == '\n') {
            line.pop_back();
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        // long line, keep appending
    }
}

namespace {

std::vector<std::string_view> split_on(std::string_view s, bool (*is_sep)(char)) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_sep(s[i])) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_sep(s[j])) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

std::vector<std::string_view> split_whitespace(std::string_view s) {
    return split_on(s, [](char c) { return c == ' ' || c == '\t'; });
}

// Tab split keeps empty fields (canonical lexicon TSV uses them for absent
// values), unlike split_whitespace.
std::vector<std::string_view> split_tab(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\t') {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::optional<double> parse_double(std::string_view tok) {
    if (tok.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

void atomic_write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        writer(out);
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot rename " + tmp.string() + " -> " + path + ": " + ec.message());
    }
}

std::string resolve_data_path(const std::string& path, const char* env_var) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    const char* base = std::getenv(env_var);
    if (base != nullptr && *base != '\0') {
        fs::path joined = fs::path(base) / path;
        if (fs::exists(joined)) return joined.string();
    }
    return path;
}

}  // namespace normpred
