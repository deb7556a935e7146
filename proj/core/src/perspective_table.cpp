#include "perspectra/perspective_table.hpp"

#include <fstream>
#include <sstream>

#include "perspectra/error.hpp"
#include "text_util.hpp"

namespace perspectra {

PerspectiveTable PerspectiveTable::defaults() {
  using E = AbstractEntity;
  constexpr auto pos = Sentiment::Positive;
  constexpr auto neg = Sentiment::Negative;
  constexpr auto actor = Role::Actor;
  constexpr auto target = Role::Target;

  PerspectiveTable t;
  const auto black = Stance::ProBlackLM;
  t.add(black, {E::BlackAmericans, pos, target});
  t.add(black, {E::Police, neg, actor});
  t.add(black, {E::Racism, neg, actor});
  t.add(black, {E::Government, neg, actor});
  t.add(black, {E::WhiteAmericans, neg, actor});
  t.add(black, {E::BlmMovement, pos, actor});
  t.add(black, {E::BlmMovement, pos, target});
  t.add(black, {E::Petition, pos, target});

  const auto blue = Stance::ProBlueLM;
  t.add(blue, {E::BlackAmericans, neg, actor});
  t.add(blue, {E::Police, pos, actor});
  t.add(blue, {E::Police, pos, target});
  t.add(blue, {E::Community, pos, target});
  t.add(blue, {E::Democrats, neg, actor});
  t.add(blue, {E::Republicans, pos, actor});
  t.add(blue, {E::BlmMovement, neg, actor});
  t.add(blue, {E::Antifa, neg, actor});
  return t;
}

PerspectiveTable PerspectiveTable::parse(const std::string& text) {
  PerspectiveTable t;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      throw DataError("perspective table line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto stance_tok = detail::trim(body.substr(0, colon));
    const auto stance = parse_stance(stance_tok);
    if (!stance) throw DataError("perspective table: unknown stance '" + std::string(stance_tok) + "'");

    const auto words = detail::split_ws(body.substr(colon + 1));
    if (words.size() != 3) {
      throw DataError("perspective table line " + std::to_string(line_no) +
                      ": expected 'entity sentiment role'");
    }
    const auto entity = parse_entity(words[0]);
    if (!entity) throw DataError("perspective table: unknown entity '" + words[0] + "'");
    const auto sentiment = parse_sentiment(words[1]);
    if (!sentiment) throw DataError("perspective table: unknown sentiment '" + words[1] + "'");
    const auto role = parse_role(words[2]);
    if (!role) throw DataError("perspective table: unknown role '" + words[2] + "'");
    t.add(*stance, {*entity, *sentiment, *role});
  }
  return t;
}

PerspectiveTable PerspectiveTable::load(const std::filesystem::path& path) {
  return parse(detail::read_file(path));
}

std::string PerspectiveTable::serialize() const {
  std::string out;
  for (const auto s : kAllStances) {
    for (const auto& p : lookup(s)) {
      out += to_string(s);
      out += ": ";
      out += to_string(p.entity);
      out += ' ';
      out += to_string(p.sentiment);
      out += ' ';
      out += to_string(p.role);
      out += '\n';
    }
  }
  return out;
}

}  // namespace perspectra
