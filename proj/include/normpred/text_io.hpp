#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace normpred {

// Line reader over plain or gzip-compressed text files (zlib reads both
// transparently). Strips trailing '\n' and '\r'.
class LineReader {
  public:
    explicit LineReader(const std::string& path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    // Returns false at EOF. The string is reused between calls.
    bool next(std::string& line);

    const std::string& path() const { return path_; }

  private:
    std::string path_;
    void* gz_ = nullptr;  // gzFile
    std::vector<char> buf_;
};

std::vector<std::string_view> split_whitespace(std::string_view s);
std::vector<std::string_view> split_tab(std::string_view s);

// Strict double parse of a whole token; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view tok);

std::string ascii_lower(std::string_view s);

// Round-trip-exact double formatting (%.17g with shortest-first probing).
std::string format_double(double v);

// Writes via a temp file in the same directory, then renames into place, so
// failed runs never leave partial outputs.
void atomic_write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);

// Returns `path` if it exists; otherwise, when the environment variable
// `env_var` names a directory containing `path`, returns the joined path.
std::string resolve_data_path(const std::string& path, const char* env_var = "NORMPRED_DATA_DIR");

}  // namespace normpred
