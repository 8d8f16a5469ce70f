#include "stsscore/backend/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "stsscore/error.hpp"
#include "stsscore/text.hpp"

namespace stsscore {

namespace {

using U32 = std::u32string;

// --------------------------------------------------------------------------
// Normalization

enum class NormType { bert, lowercase, strip_accents, nfc, nfd, nfkc, nfkd, strip };

struct NormStep {
  NormType type;
  bool clean_text = true;
  bool chinese_chars = true;
  bool strip_accents = false;
  bool lowercase = true;
  bool strip_left = false;
  bool strip_right = false;
};

bool is_chinese_char(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B920 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

bool bert_whitespace(char32_t c) { return c == '\t' || c == '\n' || c == '\r' || text::is_white_space(c); }

bool bert_control(char32_t c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  return text::is_other(c);
}

bool bert_punctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126))
    return true;
  return text::is_punctuation(c);
}

U32 icu_normalize(const U32& in, const char* name, UNormalization2Mode mode) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getInstance(nullptr, name, mode, status);
  if (U_FAILURE(status)) fail(Errc::tokenizer_failure, "ICU normalizer unavailable");
  auto src = icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(in.data()),
                                           static_cast<int32_t>(in.size()));
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) fail(Errc::tokenizer_failure, "normalization failed");
  U32 out;
  for (int32_t i = 0; i < dst.length();) {
    UChar32 c = dst.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

U32 strip_accents(const U32& in) {
  U32 decomposed = text::nfd(in);
  U32 out;
  out.reserve(decomposed.size());
  for (char32_t c : decomposed)
    if (!text::is_nonspacing_mark(c)) out.push_back(c);
  return out;
}

U32 apply_norm(const NormStep& step, U32 s) {
  switch (step.type) {
    case NormType::bert: {
      if (step.clean_text) {
        U32 out;
        out.reserve(s.size());
        for (char32_t c : s) {
          if (c == 0 || c == 0xFFFD || bert_control(c)) continue;
          out.push_back(bert_whitespace(c) ? U' ' : c);
        }
        s = std::move(out);
      }
      if (step.chinese_chars) {
        U32 out;
        out.reserve(s.size());
        for (char32_t c : s) {
          if (is_chinese_char(c)) {
            out.push_back(U' ');
            out.push_back(c);
            out.push_back(U' ');
          } else {
            out.push_back(c);
          }
        }
        s = std::move(out);
      }
      if (step.strip_accents) s = strip_accents(s);
      if (step.lowercase) s = text::lowercase(s);
      return s;
    }
    case NormType::lowercase: return text::lowercase(s);
    case NormType::strip_accents: return strip_accents(s);
    case NormType::nfc: return icu_normalize(s, "nfc", UNORM2_COMPOSE);
    case NormType::nfd: return icu_normalize(s, "nfc", UNORM2_DECOMPOSE);
    case NormType::nfkc: return icu_normalize(s, "nfkc", UNORM2_COMPOSE);
    case NormType::nfkd: return icu_normalize(s, "nfkc", UNORM2_DECOMPOSE);
    case NormType::strip: {
      std::size_t b = 0, e = s.size();
      if (step.strip_left)
        while (b < e && text::is_white_space(s[b])) ++b;
      if (step.strip_right)
        while (e > b && text::is_white_space(s[e - 1])) --e;
      return s.substr(b, e - b);
    }
  }
  return s;
}

void parse_normalizer(const nlohmann::json& j, std::vector<NormStep>& steps) {
  if (j.is_null()) return;
  const auto type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& n : j.at("normalizers")) parse_normalizer(n, steps);
  } else if (type == "BertNormalizer") {
    NormStep s{NormType::bert};
    s.clean_text = j.value("clean_text", true);
    s.chinese_chars = j.value("handle_chinese_chars", true);
    s.lowercase = j.value("lowercase", true);
    const auto& sa = j.contains("strip_accents") ? j.at("strip_accents") : nlohmann::json();
    s.strip_accents = sa.is_null() ? s.lowercase : sa.get<bool>();
    steps.push_back(s);
  } else if (type == "Lowercase") {
    steps.push_back({NormType::lowercase});
  } else if (type == "StripAccents") {
    steps.push_back({NormType::strip_accents});
  } else if (type == "NFC") {
    steps.push_back({NormType::nfc});
  } else if (type == "NFD") {
    steps.push_back({NormType::nfd});
  } else if (type == "NFKC") {
    steps.push_back({NormType::nfkc});
  } else if (type == "NFKD") {
    steps.push_back({NormType::nfkd});
  } else if (type == "Strip") {
    NormStep s{NormType::strip};
    s.strip_left = j.value("strip_left", true);
    s.strip_right = j.value("strip_right", true);
    steps.push_back(s);
  } else {
    fail(Errc::malformed_config, "unsupported normalizer '" + type + "'");
  }
}

// --------------------------------------------------------------------------
// Pre-tokenization

enum class PreType { bert, byte_level, whitespace, whitespace_split };

struct PreStep {
  PreType type;
  bool add_prefix_space = false;
  bool use_regex = true;
};

void parse_pre_tokenizer(const nlohmann::json& j, std::vector<PreStep>& steps) {
  if (j.is_null()) return;
  const auto type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& p : j.at("pretokenizers")) parse_pre_tokenizer(p, steps);
  } else if (type == "BertPreTokenizer") {
    steps.push_back({PreType::bert});
  } else if (type == "ByteLevel") {
    steps.push_back({PreType::byte_level, j.value("add_prefix_space", false), j.value("use_regex", true)});
  } else if (type == "Whitespace") {
    steps.push_back({PreType::whitespace});
  } else if (type == "WhitespaceSplit") {
    steps.push_back({PreType::whitespace_split});
  } else {
    fail(Errc::malformed_config, "unsupported pre_tokenizer '" + type + "'");
  }
}

const std::array<char32_t, 256>& byte_to_char() {
  static const std::array<char32_t, 256> table = [] {
    std::array<char32_t, 256> t{};
    std::array<bool, 256> direct{};
    for (int b = '!'; b <= '~'; ++b) direct[b] = true;
    for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
    for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
    char32_t next = 256;
    for (int b = 0; b < 256; ++b) t[b] = direct[b] ? static_cast<char32_t>(b) : next++;
    return t;
  }();
  return table;
}

const std::unordered_map<char32_t, unsigned char>& char_to_byte() {
  static const std::unordered_map<char32_t, unsigned char> table = [] {
    std::unordered_map<char32_t, unsigned char> t;
    const auto& fwd = byte_to_char();
    for (int b = 0; b < 256; ++b) t[fwd[b]] = static_cast<unsigned char>(b);
    return t;
  }();
  return table;
}

bool gpt2_other(char32_t c) { return !text::is_white_space(c) && !text::is_letter(c) && !text::is_number(c); }

// Splits following 's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
std::vector<U32> gpt2_split(const U32& s) {
  std::vector<U32> out;
  const std::size_t n = s.size();
  std::size_t i = 0;
  auto run = [&](std::size_t from, auto pred) {
    std::size_t j = from;
    while (j < n && pred(s[j])) ++j;
    return j;
  };
  while (i < n) {
    const char32_t c = s[i];
    if (c == U'\'' && i + 1 < n) {
      const char32_t d = s[i + 1];
      if (d == U's' || d == U't' || d == U'm' || d == U'd') {
        out.push_back(s.substr(i, 2));
        i += 2;
        continue;
      }
      if (i + 2 < n) {
        const char32_t e = s[i + 2];
        if ((d == U'r' && e == U'e') || (d == U'v' && e == U'e') || (d == U'l' && e == U'l')) {
          out.push_back(s.substr(i, 3));
          i += 3;
          continue;
        }
      }
    }
    std::size_t start = i;
    std::size_t body = i;
    if (c == U' ' && i + 1 < n && !text::is_white_space(s[i + 1])) body = i + 1;
    const char32_t b = s[body];
    std::size_t end;
    if (text::is_letter(b)) {
      end = run(body, [](char32_t x) { return text::is_letter(x); });
    } else if (text::is_number(b)) {
      end = run(body, [](char32_t x) { return text::is_number(x); });
    } else if (!text::is_white_space(b)) {
      end = run(body, gpt2_other);
    } else {
      const std::size_t ws_end = run(i, [](char32_t x) { return text::is_white_space(x); });
      const std::size_t k = ws_end - i;
      end = (ws_end == n || k == 1) ? ws_end : ws_end - 1;
    }
    out.push_back(s.substr(start, end - start));
    i = end;
  }
  return out;
}

U32 to_byte_level(const U32& piece) {
  const std::string utf8 = text::to_utf8(piece);
  const auto& table = byte_to_char();
  U32 out;
  out.reserve(utf8.size());
  for (unsigned char b : utf8) out.push_back(table[b]);
  return out;
}

std::vector<U32> apply_pre(const PreStep& step, const std::vector<U32>& pieces) {
  std::vector<U32> out;
  for (const auto& p : pieces) {
    switch (step.type) {
      case PreType::bert: {
        U32 cur;
        for (char32_t c : p) {
          if (bert_whitespace(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
          } else if (bert_punctuation(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
            out.push_back(U32(1, c));
          } else {
            cur.push_back(c);
          }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
        break;
      }
      case PreType::whitespace_split: {
        U32 cur;
        for (char32_t c : p) {
          if (text::is_white_space(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
          } else {
            cur.push_back(c);
          }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
        break;
      }
      case PreType::whitespace: {
        // \w+|[^\w\s]+
        auto word = [](char32_t c) {
          return text::is_letter(c) || text::is_number(c) || c == U'_' || text::is_nonspacing_mark(c);
        };
        std::size_t i = 0;
        while (i < p.size()) {
          if (text::is_white_space(p[i])) { ++i; continue; }
          const bool w = word(p[i]);
          std::size_t j = i;
          while (j < p.size() && !text::is_white_space(p[j]) && word(p[j]) == w) ++j;
          out.push_back(p.substr(i, j - i));
          i = j;
        }
        break;
      }
      case PreType::byte_level: {
        U32 src = p;
        if (step.add_prefix_space && !src.empty() && src.front() != U' ') src.insert(src.begin(), U' ');
        if (step.use_regex) {
          for (auto& piece : gpt2_split(src)) out.push_back(to_byte_level(piece));
        } else {
          out.push_back(to_byte_level(src));
        }
        break;
      }
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Models

enum class ModelType { word_piece, bpe, word_level };

struct Model {
  ModelType type = ModelType::word_level;
  std::unordered_map<std::string, std::int32_t> vocab;
  std::optional<std::int32_t> unk;
  std::string prefix = "##";
  std::size_t max_chars = 100;
  std::unordered_map<std::string, int> merge_rank;  // key: left + '\0' + right
};

std::string merge_key(const std::string& a, const std::string& b) {
  std::string k;
  k.reserve(a.size() + b.size() + 1);
  k.append(a).push_back('\0');
  k.append(b);
  return k;
}

void model_tokenize(const Model& m, const U32& word, std::vector<std::int32_t>& ids) {
  switch (m.type) {
    case ModelType::word_level: {
      auto it = m.vocab.find(text::to_utf8(word));
      if (it != m.vocab.end()) ids.push_back(it->second);
      else if (m.unk) ids.push_back(*m.unk);
      else fail(Errc::tokenizer_failure, "token outside WordLevel vocabulary and no unk token");
      return;
    }
    case ModelType::word_piece: {
      if (!m.unk) fail(Errc::tokenizer_failure, "WordPiece model requires an unk token");
      if (word.size() > m.max_chars) {
        ids.push_back(*m.unk);
        return;
      }
      std::vector<std::int32_t> pieces;
      std::size_t start = 0;
      while (start < word.size()) {
        std::size_t end = word.size();
        std::optional<std::int32_t> found;
        while (start < end) {
          std::string sub = text::to_utf8(word.substr(start, end - start));
          if (start > 0) sub = m.prefix + sub;
          auto it = m.vocab.find(sub);
          if (it != m.vocab.end()) {
            found = it->second;
            break;
          }
          --end;
        }
        if (!found) {
          ids.push_back(*m.unk);
          return;
        }
        pieces.push_back(*found);
        start = end;
      }
      ids.insert(ids.end(), pieces.begin(), pieces.end());
      return;
    }
    case ModelType::bpe: {
      std::vector<std::string> symbols;
      symbols.reserve(word.size());
      for (char32_t c : word) symbols.push_back(text::to_utf8(U32(1, c)));
      while (symbols.size() > 1) {
        int best = std::numeric_limits<int>::max();
        std::size_t best_at = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
          auto it = m.merge_rank.find(merge_key(symbols[i], symbols[i + 1]));
          if (it != m.merge_rank.end() && it->second < best) {
            best = it->second;
            best_at = i;
          }
        }
        if (best == std::numeric_limits<int>::max()) break;
        const std::string left = symbols[best_at];
        const std::string right = symbols[best_at + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
          if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
            merged.push_back(left + right);
            i += 2;
          } else {
            merged.push_back(symbols[i]);
            ++i;
          }
        }
        symbols = std::move(merged);
      }
      for (const auto& s : symbols) {
        auto it = m.vocab.find(s);
        if (it != m.vocab.end()) ids.push_back(it->second);
        else if (m.unk) ids.push_back(*m.unk);
      }
      return;
    }
  }
}

Model parse_model(const nlohmann::json& j) {
  Model m;
  const auto type = j.value("type", std::string());
  auto read_vocab = [&](const nlohmann::json& v) {
    for (auto it = v.begin(); it != v.end(); ++it) m.vocab[it.key()] = it.value().get<std::int32_t>();
  };
  auto read_unk = [&]() {
    if (j.contains("unk_token") && j.at("unk_token").is_string()) {
      auto it = m.vocab.find(j.at("unk_token").get<std::string>());
      if (it == m.vocab.end()) fail(Errc::malformed_config, "unk_token not in vocabulary");
      m.unk = it->second;
    }
  };
  if (type == "WordPiece") {
    m.type = ModelType::word_piece;
    read_vocab(j.at("vocab"));
    read_unk();
    m.prefix = j.value("continuing_subword_prefix", std::string("##"));
    m.max_chars = j.value("max_input_chars_per_word", std::size_t{100});
  } else if (type == "WordLevel") {
    m.type = ModelType::word_level;
    read_vocab(j.at("vocab"));
    read_unk();
  } else if (type == "BPE") {
    m.type = ModelType::bpe;
    read_vocab(j.at("vocab"));
    read_unk();
    for (const char* key : {"continuing_subword_prefix", "end_of_word_suffix"}) {
      if (j.contains(key) && !j.at(key).is_null() && !j.at(key).get<std::string>().empty())
        fail(Errc::malformed_config, std::string("BPE ") + key + " is not supported");
    }
    int rank = 0;
    for (const auto& merge : j.at("merges")) {
      std::string a, b;
      if (merge.is_array()) {
        a = merge.at(0).get<std::string>();
        b = merge.at(1).get<std::string>();
      } else {
        const auto s = merge.get<std::string>();
        const auto sp = s.find(' ');
        if (sp == std::string::npos) fail(Errc::malformed_config, "malformed BPE merge '" + s + "'");
        a = s.substr(0, sp);
        b = s.substr(sp + 1);
      }
      m.merge_rank.emplace(merge_key(a, b), rank++);
    }
  } else {
    fail(Errc::malformed_config, "unsupported tokenizer model '" + type + "'");
  }
  return m;
}

// --------------------------------------------------------------------------
// Post-processing

struct TemplatePiece {
  bool special = false;
  std::string id;  // "A"/"B" for sequences, special token name otherwise
  std::uint8_t type_id = 0;
};

struct PostProcessor {
  bool present = false;
  std::vector<TemplatePiece> single;
  std::vector<TemplatePiece> pair;
  std::unordered_map<std::string, std::vector<std::int32_t>> special_ids;
};

std::vector<TemplatePiece> parse_template(const nlohmann::json& arr) {
  std::vector<TemplatePiece> out;
  for (const auto& item : arr) {
    if (item.contains("SpecialToken")) {
      const auto& s = item.at("SpecialToken");
      out.push_back({true, s.at("id").get<std::string>(), s.value("type_id", std::uint8_t{0})});
    } else if (item.contains("Sequence")) {
      const auto& s = item.at("Sequence");
      out.push_back({false, s.at("id").get<std::string>(), s.value("type_id", std::uint8_t{0})});
    } else {
      fail(Errc::malformed_config, "malformed template piece");
    }
  }
  return out;
}

void parse_post(const nlohmann::json& j, PostProcessor& post) {
  if (j.is_null()) return;
  const auto type = j.at("type").get<std::string>();
  auto token_pair = [](const nlohmann::json& p) {
    return std::make_pair(p.at(0).get<std::string>(), p.at(1).get<std::int32_t>());
  };
  if (type == "Sequence") {
    for (const auto& p : j.at("processors")) parse_post(p, post);
  } else if (type == "ByteLevel") {
    return;
  } else if (type == "TemplateProcessing") {
    post.present = true;
    post.single = parse_template(j.at("single"));
    post.pair = parse_template(j.at("pair"));
    for (auto it = j.at("special_tokens").begin(); it != j.at("special_tokens").end(); ++it)
      post.special_ids[it.key()] = it.value().at("ids").get<std::vector<std::int32_t>>();
  } else if (type == "RobertaProcessing" || type == "BertProcessing") {
    post.present = true;
    const auto [cls, cls_id] = token_pair(j.at("cls"));
    const auto [sep, sep_id] = token_pair(j.at("sep"));
    post.special_ids[cls] = {cls_id};
    post.special_ids[sep] = {sep_id};
    post.single = {{true, cls, 0}, {false, "A", 0}, {true, sep, 0}};
    if (type == "RobertaProcessing") {
      post.pair = {{true, cls, 0}, {false, "A", 0}, {true, sep, 0},
                   {true, sep, 0}, {false, "B", 0}, {true, sep, 0}};
    } else {
      post.pair = {{true, cls, 0}, {false, "A", 0}, {true, sep, 0}, {false, "B", 1}, {true, sep, 1}};
    }
  } else {
    fail(Errc::malformed_config, "unsupported post_processor '" + type + "'");
  }
}

// --------------------------------------------------------------------------
// Decoding

enum class DecoderType { none, word_piece, byte_level };

struct Decoder {
  DecoderType type = DecoderType::none;
  std::string prefix = "##";
  bool cleanup = true;
};

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string cleanup_tokenization(std::string s) {
  static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
      {" .", "."},     {" ?", "?"},     {" !", "!"},         {" ,", ","},     {" ' ", "'"},
      {" n't", "n't"}, {" 'm", "'m"},   {" do not", " don't"}, {" 's", "'s"}, {" 've", "'ve"},
      {" 're", "'re"}};
  for (const auto& [from, to] : kRules) s = replace_all(std::move(s), from, to);
  return s;
}

struct AddedToken {
  std::int32_t id;
  U32 content;
  bool lstrip = false;
  bool rstrip = false;
  bool single_word = false;
  bool special = false;
};

}  // namespace

// --------------------------------------------------------------------------

struct Tokenizer::Impl {
  std::vector<NormStep> normalizers;
  std::vector<PreStep> pre_tokenizers;
  Model model;
  PostProcessor post;
  Decoder decoder;
  std::vector<AddedToken> added;  // longest content first
  std::unordered_map<std::int32_t, std::string> id_to_token;
  std::unordered_map<std::int32_t, bool> special;

  void encode_segment(const U32& segment, std::vector<std::int32_t>& ids) const {
    U32 s = segment;
    for (const auto& n : normalizers) s = apply_norm(n, std::move(s));
    std::vector<U32> pieces{s};
    for (const auto& p : pre_tokenizers) pieces = apply_pre(p, pieces);
    for (const auto& piece : pieces)
      if (!piece.empty()) model_tokenize(model, piece, ids);
  }

  std::vector<std::int32_t> encode_raw(std::string_view utf8) const {
    const U32 s = text::to_u32(utf8);
    std::vector<std::int32_t> ids;
    std::size_t seg_start = 0;
    std::size_t i = 0;
    auto word_char = [](char32_t c) { return text::is_letter(c) || text::is_number(c) || c == U'_'; };
    while (i < s.size()) {
      const AddedToken* hit = nullptr;
      for (const auto& tok : added) {
        if (tok.content.empty() || s.compare(i, tok.content.size(), tok.content) != 0) continue;
        if (tok.single_word) {
          const std::size_t e = i + tok.content.size();
          if ((i > 0 && word_char(s[i - 1])) || (e < s.size() && word_char(s[e]))) continue;
        }
        hit = &tok;
        break;
      }
      if (!hit) {
        ++i;
        continue;
      }
      std::size_t seg_end = i;
      if (hit->lstrip)
        while (seg_end > seg_start && text::is_white_space(s[seg_end - 1])) --seg_end;
      if (seg_end > seg_start) encode_segment(s.substr(seg_start, seg_end - seg_start), ids);
      ids.push_back(hit->id);
      i += hit->content.size();
      if (hit->rstrip)
        while (i < s.size() && text::is_white_space(s[i])) ++i;
      seg_start = i;
    }
    if (seg_start < s.size()) encode_segment(s.substr(seg_start), ids);
    return ids;
  }

  std::size_t added_specials(bool pair) const {
    if (!post.present) return 0;
    std::size_t n = 0;
    for (const auto& piece : pair ? post.pair : post.single)
      if (piece.special) n += post.special_ids.at(piece.id).size();
    return n;
  }

  EncodedInput assemble(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>* b) const {
    EncodedInput out;
    auto push = [&](std::int32_t id, std::uint8_t type, bool sp) {
      out.token_ids.push_back(id);
      out.attention_mask.push_back(1);
      out.special_tokens_mask.push_back(sp ? 1 : 0);
      out.type_ids.push_back(type);
    };
    if (!post.present) {
      for (auto id : a) push(id, 0, false);
      if (b) {
        out.pair_boundary = out.size();
        for (auto id : *b) push(id, 1, false);
      }
      return out;
    }
    for (const auto& piece : b ? post.pair : post.single) {
      if (piece.special) {
        for (auto id : post.special_ids.at(piece.id)) push(id, piece.type_id, true);
      } else if (piece.id == "A") {
        for (auto id : a) push(id, piece.type_id, false);
      } else {
        out.pair_boundary = out.size();
        if (b)
          for (auto id : *b) push(id, piece.type_id, false);
      }
    }
    return out;
  }
};

Tokenizer::Tokenizer(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Tokenizer Tokenizer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open tokenizer desc " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_config, "tokenizer.json: " + std::string(e.what()));
  }
  return from_json(j);
}

Tokenizer Tokenizer::from_json(const nlohmann::json& desc) {
  auto impl = std::make_shared<Impl>();
  try {
    parse_normalizer(desc.value("normalizer", nlohmann::json()), impl->normalizers);
    parse_pre_tokenizer(desc.value("pre_tokenizer", nlohmann::json()), impl->pre_tokenizers);
    impl->model = parse_model(desc.at("model"));
    parse_post(desc.value("post_processor", nlohmann::json()), impl->post);

    const auto dec = desc.value("decoder", nlohmann::json());
    if (!dec.is_null()) {
      const auto type = dec.at("type").get<std::string>();
      if (type == "WordPiece") {
        impl->decoder.type = DecoderType::word_piece;
        impl->decoder.prefix = dec.value("prefix", std::string("##"));
        impl->decoder.cleanup = dec.value("cleanup", true);
      } else if (type == "ByteLevel") {
        impl->decoder.type = DecoderType::byte_level;
      } else {
        fail(Errc::malformed_config, "unsupported decoder '" + type + "'");
      }
    }

    for (const auto& [token, id] : impl->model.vocab) impl->id_to_token[id] = token;
    for (const auto& t : desc.value("added_tokens", nlohmann::json::array())) {
      AddedToken tok;
      tok.id = t.at("id").get<std::int32_t>();
      const auto content = t.at("content").get<std::string>();
      tok.content = text::to_u32(content);
      tok.lstrip = t.value("lstrip", false);
      tok.rstrip = t.value("rstrip", false);
      tok.single_word = t.value("single_word", false);
      tok.special = t.value("special", false);
      impl->id_to_token[tok.id] = content;
      impl->special[tok.id] = tok.special;
      impl->added.push_back(std::move(tok));
    }
    std::stable_sort(impl->added.begin(), impl->added.end(),
                     [](const AddedToken& x, const AddedToken& y) { return x.content.size() > y.content.size(); });
    for (const auto& [name, ids] : impl->post.special_ids)
      for (auto id : ids) impl->special[id] = true;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_config, "tokenizer.json: " + std::string(e.what()));
  }
  return Tokenizer(std::move(impl));
}

std::vector<std::int32_t> Tokenizer::encode_ids(std::string_view text) const { return impl_->encode_raw(text); }

std::vector<std::string> Tokenizer::encode_tokens(std::string_view text) const {
  std::vector<std::string> out;
  for (auto id : encode_ids(text)) out.push_back(id_to_token(id));
  return out;
}

EncodedInput Tokenizer::encode(std::string_view text, std::size_t max_len) const {
  if (text::is_blank(text)) fail(Errc::empty_text, "cannot tokenize empty text");
  auto ids = impl_->encode_raw(text);
  const std::size_t extra = impl_->added_specials(false);
  const std::size_t budget = max_len > extra ? max_len - extra : 0;
  if (ids.size() > budget) ids.resize(budget);
  return impl_->assemble(ids, nullptr);
}

EncodedInput Tokenizer::encode_pair(std::string_view text_a, std::string_view text_b, std::size_t max_len) const {
  if (text::is_blank(text_a) || text::is_blank(text_b)) fail(Errc::empty_text, "cannot tokenize empty text");
  auto a = impl_->encode_raw(text_a);
  auto b = impl_->encode_raw(text_b);
  const std::size_t extra = impl_->added_specials(true);
  const std::size_t budget = max_len > extra ? max_len - extra : 0;
  if (a.size() + b.size() > budget) {
    const bool a_short = a.size() <= b.size();
    auto& shorter = a_short ? a : b;
    auto& longer = a_short ? b : a;
    const std::size_t keep_short = std::min(shorter.size(), budget / 2);
    shorter.resize(keep_short);
    longer.resize(budget - keep_short);
  }
  return impl_->assemble(a, &b);
}

std::string Tokenizer::decode(std::span<const std::int32_t> ids, bool skip_special_tokens) const {
  std::vector<std::string> tokens;
  for (auto id : ids) {
    if (skip_special_tokens && is_special(id)) continue;
    tokens.push_back(id_to_token(id));
  }
  const auto& d = impl_->decoder;
  std::string out;
  switch (d.type) {
    case DecoderType::none:
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
      }
      return out;
    case DecoderType::word_piece:
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string tok = tokens[i];
        if (i != 0) {
          if (tok.rfind(d.prefix, 0) == 0) tok = tok.substr(d.prefix.size());
          else tok = " " + tok;
        }
        if (d.cleanup) tok = cleanup_tokenization(std::move(tok));
        out += tok;
      }
      return out;
    case DecoderType::byte_level: {
      const auto& table = char_to_byte();
      std::string bytes;
      for (const auto& tok : tokens) {
        for (char32_t c : text::to_u32(tok)) {
          auto it = table.find(c);
          if (it != table.end()) bytes.push_back(static_cast<char>(it->second));
          else text::append_utf8(bytes, c);
        }
      }
      return text::to_utf8(text::to_u32(bytes));
    }
  }
  return out;
}

std::optional<std::int32_t> Tokenizer::token_to_id(std::string_view token) const {
  auto it = impl_->model.vocab.find(std::string(token));
  if (it != impl_->model.vocab.end()) return it->second;
  for (const auto& t : impl_->added)
    if (text::to_utf8(t.content) == token) return t.id;
  return std::nullopt;
}

std::string Tokenizer::id_to_token(std::int32_t id) const {
  auto it = impl_->id_to_token.find(id);
  if (it == impl_->id_to_token.end()) fail(Errc::tokenizer_failure, "unknown token id " + std::to_string(id));
  return it->second;
}

bool Tokenizer::is_special(std::int32_t id) const {
  auto it = impl_->special.find(id);
  return it != impl_->special.end() && it->second;
}

std::size_t Tokenizer::vocab_size() const { return impl_->id_to_token.size(); }

std::size_t Tokenizer::added_special_tokens(bool pair) const { return impl_->added_specials(pair); }

}  // namespace stsscore
