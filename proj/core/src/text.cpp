#include "stsscore/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "stsscore/error.hpp"

namespace stsscore::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

icu::UnicodeString to_icu(std::u32string_view text) {
  return icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                       static_cast<int32_t>(text.size()));
}

std::u32string from_icu(const icu::UnicodeString& s) {
  std::u32string out;
  out.reserve(s.length());
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

}  // namespace

// Decodes one code point starting at byte i; returns the number of bytes consumed.
static std::size_t decode_one(std::string_view utf8, std::size_t i, char32_t& out) {
  const auto* s = reinterpret_cast<const unsigned char*>(utf8.data());
  const std::size_t n = utf8.size();
  unsigned char c = s[i];
  if (c < 0x80) {
    out = c;
    return 1;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; min = 0x80; }
  else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; min = 0x800; }
  else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; min = 0x10000; }
  else { out = kReplacement; return 1; }
  if (i + len > n) { out = kReplacement; return 1; }
  for (std::size_t k = 1; k < len; ++k) {
    if ((s[i + k] & 0xC0) != 0x80) { out = kReplacement; return 1; }
    cp = (cp << 6) | (s[i + k] & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) { out = kReplacement; return 1; }
  out = cp;
  return len;
}

std::u32string to_u32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) {
    char32_t cp;
    i += decode_one(utf8, i, cp);
    out.push_back(cp);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
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

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

std::string nfc(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8) {
    if (c >= 0x80) { ascii = false; break; }
  }
  if (ascii) return std::string(utf8);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(Errc::invalid_argument, "ICU NFC normalizer unavailable");
  auto src = to_icu(to_u32(utf8));
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) fail(Errc::invalid_argument, "NFC normalization failed");
  return to_utf8(from_icu(dst));
}

std::u32string nfd(std::u32string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) fail(Errc::invalid_argument, "ICU NFD normalizer unavailable");
  icu::UnicodeString dst = norm->normalize(to_icu(text), status);
  if (U_FAILURE(status)) fail(Errc::invalid_argument, "NFD normalization failed");
  return from_icu(dst);
}

std::u32string lowercase(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back((cp >= 'A' && cp <= 'Z') ? cp + 32 : cp);
      continue;
    }
    UChar src[2];
    int32_t len = 0;
    U16_APPEND_UNSAFE(src, len, static_cast<UChar32>(cp));
    UChar dst[8];
    UErrorCode status = U_ZERO_ERROR;
    int32_t n = u_strToLower(dst, 8, src, len, "", &status);
    if (U_FAILURE(status) || n > 8) {
      out.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp))));
      continue;
    }
    for (int32_t i = 0; i < n;) {
      UChar32 c;
      U16_NEXT(dst, i, n, c);
      out.push_back(static_cast<char32_t>(c));
    }
  }
  return out;
}

bool is_white_space(char32_t cp) {
  if (cp < 0x80) return cp == ' ' || (cp >= 0x09 && cp <= 0x0D);
  return u_hasBinaryProperty(static_cast<UChar32>(cp), UCHAR_WHITE_SPACE);
}

bool is_letter(char32_t cp) { return U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_L_MASK; }
bool is_number(char32_t cp) { return U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_N_MASK; }
bool is_punctuation(char32_t cp) { return U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_P_MASK; }
bool is_nonspacing_mark(char32_t cp) { return u_charType(static_cast<UChar32>(cp)) == U_NON_SPACING_MARK; }

bool is_other(char32_t cp) {
  auto t = u_charType(static_cast<UChar32>(cp));
  return t == U_CONTROL_CHAR || t == U_FORMAT_CHAR || t == U_UNASSIGNED || t == U_PRIVATE_USE_CHAR;
}

std::string_view trim(std::string_view utf8) {
  std::size_t begin = utf8.size();
  std::size_t end = 0;
  for (std::size_t i = 0; i < utf8.size();) {
    char32_t cp;
    std::size_t len = decode_one(utf8, i, cp);
    if (!is_white_space(cp)) {
      if (begin == utf8.size()) begin = i;
      end = i + len;
    }
    i += len;
  }
  if (begin == utf8.size()) return utf8.substr(0, 0);
  return utf8.substr(begin, end - begin);
}

bool is_blank(std::string_view utf8) { return trim(utf8).empty(); }

std::size_t char_count(std::string_view utf8) { return to_u32(utf8).size(); }

}  // namespace stsscore::text
