#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace groundwork {

// Lower-case 40-hex SHA-1 digest.
std::string sha1_hex(std::string_view bytes);

bool is_sha1_hex(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

std::string base64_encode(std::string_view bytes);
// Throws InvalidInput on malformed input.
std::string base64_decode(std::string_view text);

// Random (version 4, variant 1) UUID in canonical 8-4-4-4-12 form.
std::string make_uuid4(std::mt19937_64& rng);
std::string make_uuid4();
bool is_uuid4(std::string_view s);

}  // namespace groundwork
