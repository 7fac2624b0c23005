#include "rdness/io.hpp"

#include <charconv>
#include <cmath>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "rdness/error.hpp"

namespace rdness {

namespace {

std::string digest_hex(const EVP_MD* md, std::initializer_list<std::string_view> parts) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw IoError("digest: EVP_MD_CTX_new failed");
    unsigned char buf[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    bool ok = EVP_DigestInit_ex(ctx, md, nullptr) == 1;
    for (auto p : parts) ok = ok && EVP_DigestUpdate(ctx, p.data(), p.size()) == 1;
    ok = ok && EVP_DigestFinal_ex(ctx, buf, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw IoError("digest: OpenSSL failure");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[buf[i] >> 4]);
        out.push_back(hex[buf[i] & 15]);
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw IoError("CsvWriter: cannot open " + path.string());
    for (const auto& h : header) field(std::string_view(h));
    end_row();
}

CsvWriter& CsvWriter::field(std::string_view v) {
    if (pending_ > 0) out_ << ',';
    out_ << v;
    ++pending_;
    return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::field(std::int64_t v) { return field(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    if (pending_ != columns_)
        throw IoError("CsvWriter: row has " + std::to_string(pending_) + " fields, header has " + std::to_string(columns_));
    out_ << '\n';
    pending_ = 0;
    if (!out_) throw IoError("CsvWriter: write failed for " + path_.string());
}

void CsvWriter::close() {
    if (pending_ != 0) throw IoError("CsvWriter: unterminated row in " + path_.string());
    out_.close();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sha256_hex(std::string_view bytes) { return digest_hex(EVP_sha256(), {bytes}); }

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string git_blob_sha1(std::string_view bytes) {
    const std::string head = "blob " + std::to_string(bytes.size());
    return digest_hex(EVP_sha1(), {std::string_view(head.c_str(), head.size() + 1), bytes});
}

}  // namespace rdness
