#include "mealgen/digest.hpp"

#include <array>
#include <fstream>

#include <openssl/evp.h>

#include "mealgen/error.hpp"

namespace mealgen {

namespace {

std::string to_hex(const unsigned char* digest, unsigned len) {
    static const char* hex = "0123456789abcdef";
    std::string out(static_cast<size_t>(len) * 2, '0');
    for (unsigned i = 0; i < len; ++i) {
        out[2 * i] = hex[digest[i] >> 4];
        out[2 * i + 1] = hex[digest[i] & 0xf];
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::string sha256_hex(const void* data, size_t len) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned digest_len = 0;
    if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1)
        throw Error(Error::Kind::Io, "SHA-256 digest failed");
    return to_hex(digest, digest_len);
}

std::string sha256_hex(const std::string& data) { return sha256_hex(data.data(), data.size()); }

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Error e(Error::Kind::Io, "cannot open file for hashing: " + path);
        e.path = path;
        throw e;
    }
    EvpCtx md;
    if (!md.ctx || EVP_DigestInit_ex(md.ctx, EVP_sha256(), nullptr) != 1)
        throw Error(Error::Kind::Io, "SHA-256 init failed");

    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(md.ctx, buf.data(), static_cast<size_t>(got)) != 1)
            throw Error(Error::Kind::Io, "SHA-256 update failed");
    }
    if (in.bad()) {
        Error e(Error::Kind::Io, "read error while hashing: " + path);
        e.path = path;
        throw e;
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned digest_len = 0;
    if (EVP_DigestFinal_ex(md.ctx, digest, &digest_len) != 1)
        throw Error(Error::Kind::Io, "SHA-256 final failed");
    return to_hex(digest, digest_len);
}

} // namespace mealgen
