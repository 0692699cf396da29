#include "sg/canonical.hpp"

namespace sg {

std::string canonical_dump(const nlohmann::json& value) {
  // nlohmann's default object_t is a std::map keyed by std::string, whose
  // ordering is char_traits<char>::lt, i.e. unsigned bytewise.
  return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sg
