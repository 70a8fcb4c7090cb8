#include "parablock/utf8.hpp"

namespace parablock::utf8 {

std::optional<char32_t> decode(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  std::size_t length = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    length = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return std::nullopt;
  }
  if (pos + length > text.size()) {
    ++pos;
    return std::nullopt;
  }
  for (std::size_t i = 1; i < length; ++i) {
    const unsigned char cont = byte(pos + i);
    if ((cont & 0xC0) != 0x80) {
      ++pos;
      return std::nullopt;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  // Overlong encodings, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[length] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return std::nullopt;
  }
  pos += length;
  return cp;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (!decode(text, pos)) return false;
  }
  return true;
}

namespace {

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }
bool even(char32_t cp) { return (cp & 1) == 0; }

}  // namespace

char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return in(cp, 'A', 'Z') ? cp + 32 : cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 32;
  if (cp == 0x130) return 'i';
  if (in(cp, 0x100, 0x137) && cp != 0x131) return even(cp) ? cp + 1 : cp;
  if (in(cp, 0x139, 0x148)) return even(cp) ? cp : cp + 1;
  if (in(cp, 0x14A, 0x177)) return even(cp) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (in(cp, 0x179, 0x17E)) return even(cp) ? cp : cp + 1;
  if (cp == 0x386) return 0x3AC;
  if (in(cp, 0x388, 0x38A)) return cp + 37;
  if (cp == 0x38C) return 0x3CC;
  if (in(cp, 0x38E, 0x38F)) return cp + 63;
  if (in(cp, 0x391, 0x3AB) && cp != 0x3A2) return cp + 32;
  if (in(cp, 0x400, 0x40F)) return cp + 80;
  if (in(cp, 0x410, 0x42F)) return cp + 32;
  if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF)) return even(cp) ? cp + 1 : cp;
  if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) return even(cp) ? cp + 1 : cp;
  return cp;
}

char32_t to_upper(char32_t cp) {
  if (cp < 0x80) return in(cp, 'a', 'z') ? cp - 32 : cp;
  if (in(cp, 0xE0, 0xFE) && cp != 0xF7) return cp - 32;
  if (cp == 0xFF) return 0x178;
  if (cp == 0x131) return 'I';
  if (in(cp, 0x100, 0x137)) return even(cp) ? cp : cp - 1;
  if (in(cp, 0x139, 0x148)) return even(cp) ? cp - 1 : cp;
  if (in(cp, 0x14A, 0x177)) return even(cp) ? cp : cp - 1;
  if (in(cp, 0x179, 0x17E)) return even(cp) ? cp - 1 : cp;
  if (cp == 0x3AC) return 0x386;
  if (in(cp, 0x3AD, 0x3AF)) return cp - 37;
  if (cp == 0x3CC) return 0x38C;
  if (in(cp, 0x3CD, 0x3CE)) return cp - 63;
  if (cp == 0x3C2) return 0x3A3;
  if (in(cp, 0x3B1, 0x3CB)) return cp - 32;
  if (in(cp, 0x430, 0x44F)) return cp - 32;
  if (in(cp, 0x450, 0x45F)) return cp - 80;
  if (in(cp, 0x460, 0x481) || in(cp, 0x48A, 0x4BF)) return even(cp) ? cp : cp - 1;
  if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) return even(cp) ? cp : cp - 1;
  return cp;
}

namespace {

template <typename Map>
std::string map_code_points(std::string_view text, Map&& map) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  std::size_t index = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    if (auto cp = decode(text, pos)) {
      append(out, map(*cp, index));
    } else {
      // Pass invalid bytes through untouched.
      out.append(text.substr(start, pos - start));
    }
    ++index;
  }
  return out;
}

}  // namespace

std::string fold_case(std::string_view text) {
  return map_code_points(text, [](char32_t cp, std::size_t) { return to_lower(cp); });
}

std::string to_upper(std::string_view text) {
  return map_code_points(text, [](char32_t cp, std::size_t) { return to_upper(cp); });
}

std::string capitalize(std::string_view text) {
  return map_code_points(text, [](char32_t cp, std::size_t index) {
    return index == 0 ? to_upper(cp) : to_lower(cp);
  });
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return in(cp, 0x2000, 0x200A);
  }
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return in(cp, '!', '/') || in(cp, ':', '@') || in(cp, '[', '`') || in(cp, '{', '~');
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x37E: case 0x387:
      return true;
    default:
      return in(cp, 0x2010, 0x2027) || in(cp, 0x2030, 0x205E) || in(cp, 0x3001, 0x3003) ||
             in(cp, 0x3008, 0x3011) || in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20);
  }
}

}  // namespace parablock::utf8
