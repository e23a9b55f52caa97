#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <string>
#include <string_view>

namespace kgwe {

// Input stream over a file that may be gzip-compressed. Compression is detected
// from the magic bytes, so plain text files are read unchanged.
class InputFile {
public:
    explicit InputFile(const std::filesystem::path& path);
    ~InputFile();

    InputFile(const InputFile&) = delete;
    InputFile& operator=(const InputFile&) = delete;

    std::istream& stream() { return *stream_; }

private:
    class GzipBuffer;
    std::unique_ptr<GzipBuffer> buffer_;
    std::unique_ptr<std::istream> stream_;
};

// Opens `path` for writing, creating parent directories. Throws kgwe::Error on failure.
std::unique_ptr<std::ostream> open_output(const std::filesystem::path& path);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Splits `line` on `delim` without allocating the pieces.
template <class Fn>
void split_fields(std::string_view line, char delim, Fn&& fn) {
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fn(line.substr(start));
            return;
        }
        fn(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Removes a trailing '\r' left by CRLF files.
inline std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace kgwe
