#include "kgwe/io.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <streambuf>

#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <zlib.h>

#include "kgwe/error.hpp"
#include "kgwe/log.hpp"

namespace kgwe {

// gzread passes non-gzip input through unchanged, which gives us magic-byte
// detection for free.
class InputFile::GzipBuffer : public std::streambuf {
public:
    explicit GzipBuffer(const std::filesystem::path& path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) throw Error("cannot open " + path.string());
        gzbuffer(file_, 1 << 17);
    }
    ~GzipBuffer() override { gzclose(file_); }

protected:
    int_type underflow() override {
        if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
        const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
        if (n < 0) {
            int code = 0;
            throw Error(std::string("gzip read failed: ") + gzerror(file_, &code));
        }
        if (n == 0) return traits_type::eof();
        setg(buffer_.data(), buffer_.data(), buffer_.data() + n);
        return traits_type::to_int_type(*gptr());
    }

private:
    gzFile file_ = nullptr;
    std::array<char, 1 << 16> buffer_{};
};

InputFile::InputFile(const std::filesystem::path& path)
    : buffer_(std::make_unique<GzipBuffer>(path)),
      stream_(std::make_unique<std::istream>(buffer_.get())) {}

InputFile::~InputFile() = default;

std::unique_ptr<std::ostream> open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*out) throw Error("cannot write " + path.string());
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> chunk{};
    while (in) {
        in.read(chunk.data(), chunk.size());
        EVP_DigestUpdate(ctx.get(), chunk.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

void configure_logging() {
    const char* env = std::getenv("KGWE_LOG");
    auto level = spdlog::level::info;
    if (env != nullptr && *env != '\0') level = spdlog::level::from_str(env);
    if (spdlog::get("kgwe") == nullptr) spdlog::set_default_logger(spdlog::stderr_color_mt("kgwe"));
    spdlog::set_level(level);
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
}

}  // namespace kgwe
