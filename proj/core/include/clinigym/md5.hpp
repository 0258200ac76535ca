#pragma once

#include <string>
#include <string_view>

namespace clinigym {

/// MD5 digest of the input bytes as a 32-char lowercase hex string.
std::string md5_hex(std::string_view bytes);

}  // namespace clinigym
