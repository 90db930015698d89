// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMISS_DIGEST_HPP
#define FAIRMISS_DIGEST_HPP

// Content digests for run manifests and dataset verification. Unlike the
// rest of the library this header needs libcrypto at link time.

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "fairmiss/error.hpp"

namespace fairmiss {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::kIo, "cannot initialise SHA-256");
    }
  }

  void update(std::string_view bytes) {
    if (EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()) != 1) {
      throw Error(ErrorCode::kIo, "SHA-256 update failed");
    }
  }

  /// Lower-case hex digest. The object is spent afterwards.
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error(ErrorCode::kIo, "SHA-256 final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

struct DigestCheck {
  std::string file;
  std::string expected;
  std::string actual;  // empty when the file could not be read
  bool ok() const { return !actual.empty() && actual == expected; }
};

/// Checks every entry of a `sha256sum`-style list ("<hex>  <name>" per line)
/// against files next to it.
inline std::vector<DigestCheck> verify_sha256sums(const std::filesystem::path& sums_file) {
  std::ifstream in(sums_file);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + sums_file.string() + "'");
  std::vector<DigestCheck> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    DigestCheck c;
    if (!(ls >> c.expected >> c.file)) continue;
    if (!c.file.empty() && c.file.front() == '*') c.file.erase(0, 1);  // binary-mode marker
    try {
      c.actual = sha256_file(sums_file.parent_path() / c.file);
    } catch (const Error&) {
      c.actual.clear();
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// Expected digest of `file` if a SHA256SUMS next to it lists it.
inline std::optional<std::string> listed_digest(const std::filesystem::path& file) {
  std::ifstream in(file.parent_path() / "SHA256SUMS");
  if (!in) return std::nullopt;
  std::string hex, name;
  while (in >> hex >> name) {
    if (!name.empty() && name.front() == '*') name.erase(0, 1);
    if (name == file.filename().string()) return hex;
  }
  return std::nullopt;
}

}  // namespace fairmiss

#endif  // FAIRMISS_DIGEST_HPP
