#include <openssl/hmac.h>

#include "driverlet/tpl/template.hpp"

namespace driverlet::tpl {

std::array<u8, 32> compute_mac(const std::string& body, const Key& key) {
  std::array<u8, 32> out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), (int)key.size(),
       reinterpret_cast<const unsigned char*>(body.data()), body.size(), out.data(), &len);
  if (len != out.size()) throw std::runtime_error("unexpected MAC length");
  return out;
}

void sign(InteractionTemplate& t, const Key& key) {
  t.mac = compute_mac(serialize(t, /*include_mac=*/false), key);
  t.has_mac = true;
}

bool verify(const InteractionTemplate& t, const Key& key) {
  if (!t.has_mac) return false;
  auto want = compute_mac(serialize(t, /*include_mac=*/false), key);
  u8 diff = 0; // constant-time compare
  for (size_t i = 0; i < want.size(); i++) diff |= (u8)(want[i] ^ t.mac[i]);
  return diff == 0;
}

bool verify_file_bytes(const std::string& file_bytes, const Key& key) {
  // The MAC covers every byte that precedes the trailing "mac " line, so any
  // corruption of the stored file is caught even when a parse/re-serialize
  // round trip would normalize it away.
  size_t pos = file_bytes.rfind("\nmac ");
  size_t mac_at;
  if (pos != std::string::npos) {
    mac_at = pos + 1;
  } else if (file_bytes.rfind("mac ", 0) == 0) {
    mac_at = 0;
  } else {
    return false;
  }
  std::string body = file_bytes.substr(0, mac_at);
  std::string mac_line = file_bytes.substr(mac_at);
  if (mac_line.size() != 4 + 64 + 1 || mac_line.back() != '\n') return false;
  auto want = compute_mac(body, key);
  static const char* d = "0123456789abcdef";
  u8 diff = 0;
  for (size_t i = 0; i < want.size(); i++) {
    diff |= (u8)(mac_line[4 + 2 * i] ^ d[want[i] >> 4]);
    diff |= (u8)(mac_line[4 + 2 * i + 1] ^ d[want[i] & 0xF]);
  }
  return diff == 0;
}

} // namespace driverlet::tpl
