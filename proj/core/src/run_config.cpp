#include "perspectra/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <algorithm>
#include <sstream>

#include "perspectra/error.hpp"
#include "text_util.hpp"

namespace perspectra {
namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": expected " +
                   std::string(want));
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  try {
    std::size_t pos = 0;
    const double out = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return out;
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field count_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_u64(k, v); },
          [member](const RunConfig& c) { return std::to_string(member(c)); }};
}

template <typename Member>
Field real_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_double(k, v); },
          [member](const RunConfig& c) { return fmt(static_cast<double>(member(c))); }};
}

template <typename Member>
Field bool_field(Member member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_bool(k, v); },
          [member](const RunConfig& c) { return fmt(static_cast<bool>(member(c))); }};
}

template <typename Member>
Field path_field(Member member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { member(c) = std::filesystem::path(v); },
          [member](const RunConfig& c) {
            const auto& p = member(c);
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, std::filesystem::path>) {
              return p.string();
            } else {
              return p ? p->string() : std::string();
            }
          }};
}

using Table = std::vector<std::pair<std::string, Field>>;

const Table& table() {
  static const Table t = [] {
    Table t;
    const auto add = [&](std::string key, Field f) { t.emplace_back(std::move(key), std::move(f)); };
    // [gen]
    add("gen.n_authors", count_field([](auto& c) -> auto& { return c.experiment.gen.n_authors; }));
    add("gen.tweets_min", count_field([](auto& c) -> auto& { return c.experiment.gen.tweets_min; }));
    add("gen.tweets_max", count_field([](auto& c) -> auto& { return c.experiment.gen.tweets_max; }));
    add("gen.stance_mix", real_field([](auto& c) -> auto& { return c.experiment.gen.stance_mix; }));
    add("gen.ambiguous_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.ambiguous_rate; }));
    add("gen.retweet_homophily",
        real_field([](auto& c) -> auto& { return c.experiment.gen.retweet_homophily; }));
    add("gen.entity_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.entity_rate; }));
    add("gen.seed", count_field([](auto& c) -> auto& { return c.experiment.gen.seed; }));
    add("gen.mode", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                            if (v == "real") {
                              c.experiment.gen.mode = GenMode::RealLike;
                            } else if (v == "weak") {
                              c.experiment.gen.mode = GenMode::WeakSupervision;
                            } else {
                              bad_value(k, v, "real or weak");
                            }
                          },
                          [](const RunConfig& c) {
                            return std::string(c.experiment.gen.mode == GenMode::RealLike ? "real" : "weak");
                          }});
    add("gen.weak_tweets_per_tuple",
        count_field([](auto& c) -> auto& { return c.experiment.gen.weak_tweets_per_tuple; }));
    add("gen.signature_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.signature_rate; }));
    add("gen.cue_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.cue_rate; }));
    add("gen.frame_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.frame_rate; }));
    add("gen.ambiguous_surface_rate",
        real_field([](auto& c) -> auto& { return c.experiment.gen.ambiguous_surface_rate; }));
    add("gen.profile_rate", real_field([](auto& c) -> auto& { return c.experiment.gen.profile_rate; }));
    add("gen.behavior_alignment",
        Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                if (v == "none" || v.empty()) {
                  c.experiment.gen.behavior_alignment.reset();
                } else {
                  c.experiment.gen.behavior_alignment = to_double(k, v);
                }
              },
              [](const RunConfig& c) {
                const auto& a = c.experiment.gen.behavior_alignment;
                return a ? fmt(*a) : std::string("none");
              }});
    add("gen.time_ramp", real_field([](auto& c) -> auto& { return c.experiment.gen.time_ramp; }));
    add("gen.start_date", Field{[](RunConfig& c, std::string_view, std::string_view v) {
                                  c.experiment.gen.start_date = std::string(v);
                                },
                                [](const RunConfig& c) { return c.experiment.gen.start_date; }});
    add("gen.days", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                            c.experiment.gen.days = static_cast<int>(to_u64(k, v));
                          },
                          [](const RunConfig& c) { return std::to_string(c.experiment.gen.days); }});
    add("gen.id_prefix", Field{[](RunConfig& c, std::string_view, std::string_view v) {
                                 c.experiment.gen.id_prefix = std::string(v);
                               },
                               [](const RunConfig& c) { return c.experiment.gen.id_prefix; }});
    // [model]
    add("model.d_in", count_field([](auto& c) -> auto& { return c.experiment.model.d_in; }));
    add("model.d_h1", count_field([](auto& c) -> auto& { return c.experiment.model.d_h1; }));
    add("model.d_h2", count_field([](auto& c) -> auto& { return c.experiment.model.d_h2; }));
    add("model.lr", real_field([](auto& c) -> auto& { return c.experiment.model.lr; }));
    add("model.weight_decay", real_field([](auto& c) -> auto& { return c.experiment.model.weight_decay; }));
    add("model.input_scale", real_field([](auto& c) -> auto& { return c.experiment.model.input_scale; }));
    add("model.author_network",
        bool_field([](auto& c) -> auto& { return c.experiment.model.author_network; }));
    // [train]
    add("train.k", count_field([](auto& c) -> auto& { return c.experiment.train.k; }));
    add("train.confidence_high", real_field([](auto& c) -> auto& { return c.experiment.train.confidence_high; }));
    add("train.confidence_low", real_field([](auto& c) -> auto& { return c.experiment.train.confidence_low; }));
    add("train.confidence_switch_epoch",
        count_field([](auto& c) -> auto& { return c.experiment.train.confidence_switch_epoch; }));
    add("train.author_thresholds",
        Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                std::vector<std::pair<std::size_t, std::size_t>> out;
                for (const auto& item : detail::split_trimmed(v, ',')) {
                  const auto colon = item.find(':');
                  if (colon == std::string::npos) bad_value(k, v, "epoch:threshold pairs such as 1:10,20:5,50:3");
                  out.emplace_back(to_u64(k, detail::trim(std::string_view(item).substr(0, colon))),
                                   to_u64(k, detail::trim(std::string_view(item).substr(colon + 1))));
                }
                if (out.empty()) bad_value(k, v, "at least one epoch:threshold pair");
                c.experiment.train.author_thresholds = std::move(out);
              },
              [](const RunConfig& c) {
                std::string s;
                for (const auto& [e, t] : c.experiment.train.author_thresholds) {
                  s += (s.empty() ? "" : ",") + std::to_string(e) + ":" + std::to_string(t);
                }
                return s;
              }});
    add("train.stop_fraction", real_field([](auto& c) -> auto& { return c.experiment.train.stop_fraction; }));
    add("train.stop_patience", count_field([](auto& c) -> auto& { return c.experiment.train.stop_patience; }));
    add("train.max_epochs", count_field([](auto& c) -> auto& { return c.experiment.train.max_epochs; }));
    add("train.warmup_patience",
        count_field([](auto& c) -> auto& { return c.experiment.train.warmup_patience; }));
    add("train.warmup_min_epochs",
        count_field([](auto& c) -> auto& { return c.experiment.train.warmup_min_epochs; }));
    add("train.warmup_max_epochs",
        count_field([](auto& c) -> auto& { return c.experiment.train.warmup_max_epochs; }));
    add("train.self_learning", bool_field([](auto& c) -> auto& { return c.experiment.train.self_learning; }));
    add("train.refresh_mention_edges",
        bool_field([](auto& c) -> auto& { return c.experiment.train.refresh_mention_edges; }));
    add("train.prior_batch_size",
        count_field([](auto& c) -> auto& { return c.experiment.train.prior_batch_size; }));
    // [prior]
    add("prior.batch_size", count_field([](auto& c) -> auto& { return c.experiment.prior.batch_size; }));
    add("prior.lr", real_field([](auto& c) -> auto& { return c.experiment.prior.lr; }));
    add("prior.weight_decay", real_field([](auto& c) -> auto& { return c.experiment.prior.weight_decay; }));
    add("prior.validation_fraction",
        real_field([](auto& c) -> auto& { return c.experiment.prior.validation_fraction; }));
    add("prior.patience", count_field([](auto& c) -> auto& { return c.experiment.prior.patience; }));
    add("prior.max_epochs", count_field([](auto& c) -> auto& { return c.experiment.prior.max_epochs; }));
    // [run]
    add("run.mode", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                            const auto m = parse_supervision_mode(v);
                            if (!m) bad_value(k, v, "direct or weak");
                            c.experiment.mode = *m;
                          },
                          [](const RunConfig& c) { return std::string(to_string(c.experiment.mode)); }});
    add("run.train_authors", count_field([](auto& c) -> auto& { return c.experiment.train_authors; }));
    add("run.seed", count_field([](auto& c) -> auto& { return c.experiment.seed; }));
    add("run.prior_authors", count_field([](auto& c) -> auto& { return c.experiment.prior_authors; }));
    add("run.seeds", Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                             c.seeds.clear();
                             for (const auto& s : detail::split_trimmed(v, ',')) c.seeds.push_back(to_u64(k, s));
                           },
                           [](const RunConfig& c) {
                             std::string s;
                             for (const auto x : c.seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
                             return s;
                           }});
    // [paths]
    add("paths.corpus", path_field([](auto& c) -> auto& { return c.corpus; }));
    add("paths.weak_corpus", path_field([](auto& c) -> auto& { return c.weak_corpus; }));
    add("paths.lexicon", path_field([](auto& c) -> auto& { return c.lexicon; }));
    add("paths.perspective_table", path_field([](auto& c) -> auto& { return c.perspective_table; }));
    add("paths.checkpoint", path_field([](auto& c) -> auto& { return c.checkpoint; }));
    add("paths.out", path_field([](auto& c) -> auto& { return c.out; }));
    return t;
  }();
  return t;
}

const Field* find_field(std::string_view key) {
  for (const auto& [k, f] : table()) {
    if (k == key) return &f;
  }
  return nullptr;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto* f = find_field(key);
  if (f == nullptr) throw UsageError("unknown config key '" + std::string(key) + "'");
  f->set(*this, key, detail::trim(value));
}

void RunConfig::apply_text(std::string_view text) {
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where + "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(table().begin(), table().end(),
                                     [&](const auto& e) { return e.first.starts_with(section + "."); });
      if (!known) throw UsageError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError(where + "expected key = value");
    if (section.empty()) throw UsageError(where + "key outside of a [section]");
    const auto key = section + "." + std::string(detail::trim(line.substr(0, eq)));
    try {
      set(key, line.substr(eq + 1));
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const DataError& e) {
    throw UsageError(std::string("cannot read config: ") + e.what());
  }
  apply_text(text);
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& e : table()) k.push_back(e.first);
    return k;
  }();
  return out;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, field] : table()) {
    const auto dot = key.find('.');
    const auto sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << field.get(*this) << '\n';
  }
  return out.str();
}

}  // namespace perspectra
