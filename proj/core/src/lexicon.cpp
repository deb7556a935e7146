#include "perspectra/lexicon.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "perspectra/corpus.hpp"
#include "perspectra/error.hpp"
#include "perspectra/generated/default_data.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

int parse_frame_key(const std::string& key) {
  const auto words = detail::split_ws(key);
  if (words.size() != 2) return -1;
  const auto s = parse_sentiment(words[0]);
  const auto r = parse_role(words[1]);
  if (!s || !r) return -1;
  return frame_index(*s, *r);
}

bool mentions_signature(std::string_view text) {
  const auto lower = detail::to_lower_ascii(text);
  return lower.find(kBlackKeyword) != std::string::npos || lower.find(kBlueKeyword) != std::string::npos;
}

}  // namespace

std::string_view signature_keyword(Stance s) { return s == Stance::ProBlackLM ? kBlackKeyword : kBlueKeyword; }

Lexicon Lexicon::defaults() { return parse(std::string(generated::kDefaultLexicon)); }

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(detail::read_file(path)); }

Lexicon Lexicon::parse(const std::string& text) {
  Lexicon lex;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  const auto fail = [&](const std::string& msg) -> void {
    throw DataError("lexicon line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("unterminated section header");
      section = std::string(body.substr(1, body.size() - 2));
      static const std::vector<std::string> known{"entities", "ambiguous", "hashtags", "templates",
                                                  "modifiers", "frames",    "keywords"};
      if (std::find(known.begin(), known.end(), section) == known.end()) fail("unknown section [" + section + "]");
      continue;
    }
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) fail("expected 'key: values'");
    const std::string key(detail::trim(body.substr(0, colon)));
    const auto values = detail::split_trimmed(body.substr(colon + 1), '|');
    if (values.empty()) fail("empty value list for '" + key + "'");

    if (section == "entities") {
      const auto e = parse_entity(key);
      if (!e) fail("unknown entity '" + key + "'");
      lex.entity_surfaces[code(*e)] = values;
    } else if (section == "ambiguous") {
      AmbiguousSurface amb;
      amb.surface = key;
      std::array<bool, kNumStances> seen{};
      for (const auto& v : values) {
        const auto eq = v.find('=');
        if (eq == std::string::npos) fail("ambiguous entries look like 'stance=entity'");
        const auto stance = parse_stance(detail::trim(std::string_view(v).substr(0, eq)));
        const auto entity = parse_entity(detail::trim(std::string_view(v).substr(eq + 1)));
        if (!stance) fail("unknown stance in '" + v + "'");
        if (!entity) fail("unknown entity in '" + v + "'");
        amb.per_stance[code(*stance)] = *entity;
        seen[code(*stance)] = true;
      }
      if (!seen[0] || !seen[1]) fail("ambiguous surface '" + key + "' must resolve for both stances");
      lex.ambiguous.push_back(std::move(amb));
    } else if (section == "hashtags" || section == "frames" || section == "keywords") {
      if (key == "neutral" && section != "frames") {
        (section == "hashtags" ? lex.neutral_hashtags : lex.neutral_keywords) = values;
        continue;
      }
      const auto s = parse_stance(key);
      if (!s) fail("unknown stance '" + key + "'");
      if (section == "hashtags") {
        std::vector<std::string> tags;
        for (const auto& v : values) tags.push_back(normalize_hashtag(v));
        lex.stance_hashtags[code(*s)] = std::move(tags);
      } else if (section == "frames") {
        lex.frames[code(*s)] = values;
      } else {
        lex.profile_keywords[code(*s)] = values;
      }
    } else if (section == "templates" || section == "modifiers") {
      const int idx = parse_frame_key(key);
      if (idx < 0) fail("expected '<sentiment> <role>' key, got '" + key + "'");
      (section == "templates" ? lex.templates : lex.modifiers)[idx] = values;
    } else {
      fail("entry outside of any section");
    }
  }
  return lex;
}

void Lexicon::validate(const PerspectiveTable& table) const {
  for (int e = 0; e < kNumEntities; ++e) {
    if (entity_surfaces[e].size() < 3) {
      throw DataError("lexicon: entity " + std::string(to_string(entity_from_code(e))) +
                      " needs at least 3 surface forms");
    }
  }
  for (const auto s : kAllStances) {
    const auto& tags = stance_hashtags[code(s)];
    if (tags.size() < 5) throw DataError("lexicon: stance " + std::string(to_string(s)) + " needs at least 5 hashtags");
    if (std::find(tags.begin(), tags.end(), signature_keyword(s)) == tags.end()) {
      throw DataError("lexicon: stance " + std::string(to_string(s)) + " must list its signature hashtag " +
                      std::string(signature_keyword(s)));
    }
    for (const auto& t : tags) {
      if (t != signature_keyword(s) && mentions_signature(t)) {
        throw DataError("lexicon: hashtag '" + t + "' embeds a signature keyword");
      }
    }
    if (frames[code(s)].empty()) throw DataError("lexicon: stance " + std::string(to_string(s)) + " has no frames");
    if (profile_keywords[code(s)].empty()) {
      throw DataError("lexicon: stance " + std::string(to_string(s)) + " has no profile keywords");
    }
    for (const auto& p : table.lookup(s)) {
      const int idx = frame_index(p.sentiment, p.role);
      if (templates[idx].empty() || modifiers[idx].empty()) {
        throw DataError("lexicon: no templates/modifiers for " + std::string(to_string(p.sentiment)) + " " +
                        std::string(to_string(p.role)));
      }
    }
  }
  for (const auto& list : templates) {
    for (const auto& t : list) {
      const auto first = t.find("{E}");
      if (first == std::string::npos || t.find("{E}", first + 1) != std::string::npos) {
        throw DataError("lexicon: template '" + t + "' must contain exactly one {E}");
      }
    }
  }
  // Signature keywords may only appear through hashtags, so the keyword rule stays controlled.
  const auto check_free = [](const std::vector<std::string>& list) {
    for (const auto& w : list) {
      if (mentions_signature(w)) throw DataError("lexicon: '" + w + "' embeds a signature keyword");
    }
  };
  for (const auto& l : entity_surfaces) check_free(l);
  for (const auto& l : templates) check_free(l);
  for (const auto& l : modifiers) check_free(l);
  for (const auto& l : frames) check_free(l);
  for (const auto& l : profile_keywords) check_free(l);
  check_free(neutral_hashtags);
  check_free(neutral_keywords);
  for (const auto& a : ambiguous) {
    if (mentions_signature(a.surface)) throw DataError("lexicon: '" + a.surface + "' embeds a signature keyword");
  }
}

}  // namespace perspectra
