#include "nsci/manifest.hpp"

#include "nsci/config.hpp"
#include "nsci/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

namespace nsci {

namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error(err::construction, "sha256 init failed");
    }
    void update(const char* p, std::size_t n) { EVP_DigestUpdate(ctx_.get(), p, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &len);
        std::string out;
        char b[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(b, sizeof b, "%02x", md[i]);
            out += b;
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(err::config, "cannot read " + path.string());
    Digest d;
    std::array<char, 1 << 16> buf;
    while (is) {
        is.read(buf.data(), buf.size());
        d.update(buf.data(), std::size_t(is.gcount()));
    }
    return d.hex();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char b[32];
    std::strftime(b, sizeof b, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return b;
}

nlohmann::json make_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                             const std::string& command, const std::vector<std::filesystem::path>& files,
                             const std::vector<ManifestCheck>& checks, const std::string& started) {
    nlohmann::json m;
    m["command"] = command;
    m["toolkit_version"] = kToolkitVersion;
    m["config_sha256"] = sha256_hex(config.dump());
    m["config"] = config;
    m["started"] = started;
    m["finished"] = utc_now();
    auto& c = m["checks"] = nlohmann::json::array();
    for (const auto& x : checks) c.push_back({{"name", x.name}, {"pass", x.pass}});
    auto& f = m["files"] = nlohmann::json::array();
    for (const auto& p : files)
        f.push_back({{"path", std::filesystem::relative(p, dir).generic_string()},
                     {"bytes", std::filesystem::file_size(p)},
                     {"sha256", sha256_file(p)}});
    return m;
}

ManifestDiff verify_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest) {
    ManifestDiff d;
    for (const auto& f : manifest.at("files")) {
        const std::string rel = f.at("path").get<std::string>();
        const auto p = dir / rel;
        if (!std::filesystem::exists(p)) {
            d.missing.push_back(rel);
            continue;
        }
        if (sha256_file(p) != f.at("sha256").get<std::string>()) d.mismatched.push_back(rel);
    }
    return d;
}

}  // namespace nsci
