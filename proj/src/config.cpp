#include "svi/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "svi/csv.hpp"
#include "svi/expression.hpp"
#include "svi/noise.hpp"

namespace svi {

ParseError::ParseError(const std::string& origin, int line, int column, const std::string& msg)
    : ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_{line},
      column_{column} {}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = std::to_string(errors.size()) + " configuration error(s):";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_{std::move(errors)} {}

namespace {

constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

// ---------------------------------------------------------------------------
// Lexical layer

struct RawEntry {
  ConfigValue value;
  int line;
};

using RawSection = std::map<std::string, RawEntry>;

struct RawConfig {
  RawSection top;
  std::map<std::string, RawSection> sections;
  std::map<std::string, int> section_lines;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return is_ident_char(c) || c == '.' || c == '-' || c == '+' || c == ':'; }

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const std::string buf{s};
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  if (std::isnan(v)) return std::nullopt;
  return v;
}

class Lexer {
 public:
  Lexer(std::string origin, std::string_view line, int line_no) : origin_{std::move(origin)}, s_{line}, line_{line_no} {}

  [[noreturn]] void fail(std::size_t pos, const std::string& msg) const {
    throw ParseError(origin_, line_, static_cast<int>(pos) + 1, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  std::size_t pos() const { return pos_; }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  std::string ident(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    if (!is_ident_start(peek())) fail(pos_, std::string("expected ") + what);
    while (is_ident_char(peek())) ++pos_;
    return std::string{s_.substr(start, pos_ - start)};
  }

  void expect(char c, const char* what) {
    skip_ws();
    if (peek() != c) fail(pos_, std::string("expected ") + what);
    ++pos_;
  }

  ConfigValue value() {
    skip_ws();
    if (pos_ >= s_.size() || peek() == '#') fail(pos_, "expected a value");
    if (peek() == '"') return quoted();
    std::vector<std::pair<std::string_view, std::size_t>> items;
    while (true) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_word_char(s_[pos_])) ++pos_;
      if (pos_ == start) fail(pos_, pos_ < s_.size() ? "unexpected character '" + std::string(1, s_[pos_]) + "'"
                                                     : "expected a value");
      items.emplace_back(s_.substr(start, pos_ - start), start);
      skip_ws();
      if (peek() != ',') break;
      ++pos_;
    }
    if (!at_end_or_comment()) fail(pos_, "unexpected character '" + std::string(1, peek()) + "' after value");
    if (items.size() > 1) {
      std::vector<double> out;
      for (const auto& [text, at] : items) {
        const auto v = parse_number(text);
        if (!v) fail(at, "list items must be numbers, got '" + std::string{text} + "'");
        out.push_back(*v);
      }
      return out;
    }
    const auto [text, at] = items.front();
    if (text == "true") return true;
    if (text == "false") return false;
    if (const auto v = parse_number(text)) return *v;
    if (!is_ident_start(text.front())) fail(at, "malformed number '" + std::string{text} + "'");
    return std::string{text};
  }

 private:
  ConfigValue quoted() {
    const std::size_t open = pos_++;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail(open, "unterminated string");
      const char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail(pos_ - 1, "dangling escape");
        const char e = s_[pos_++];
        if (e != '"' && e != '\\') fail(pos_ - 2, "unknown escape '\\" + std::string(1, e) + "'");
        out.push_back(e);
      } else {
        out.push_back(c);
      }
    }
    if (!at_end_or_comment()) fail(pos_, "unexpected text after string");
    return out;
  }

  std::string origin_;
  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

RawConfig lex(std::string_view text, const std::string& origin) {
  RawConfig raw;
  RawSection* current = &raw.top;
  std::string current_name;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    Lexer lx{origin, line, line_no};
    if (!lx.at_end_or_comment()) {
      if (lx.peek() == '[') {
        lx.expect('[', "'['");
        const std::size_t at = lx.pos();
        current_name = lx.ident("section name");
        lx.expect(']', "']'");
        if (!lx.at_end_or_comment()) lx.fail(lx.pos(), "unexpected text after section header");
        if (raw.sections.count(current_name)) lx.fail(at, "duplicate section [" + current_name + "]");
        current = &raw.sections[current_name];
        raw.section_lines[current_name] = line_no;
      } else {
        const std::size_t at = lx.pos();
        const std::string key = lx.ident("a key or [section]");
        lx.expect('=', "'='");
        ConfigValue v = lx.value();
        if (current->count(key)) lx.fail(at, "duplicate key '" + key + "'");
        current->emplace(key, RawEntry{std::move(v), line_no});
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return raw;
}

// ---------------------------------------------------------------------------
// Schema

enum class FieldType { Real, ExtendedReal, Int, Bool, Word, Text, RealList, IntList };

using Check = std::function<std::string(const ConfigValue&)>;

struct FieldSpec {
  std::string name;
  FieldType type;
  std::optional<ConfigValue> fallback;  // nullopt: required
  Check check;
};

struct VariantSpec {
  std::string tag;
  std::string description;
  std::vector<FieldSpec> fields;
};

struct SectionSpec {
  std::string name;
  std::string discriminator;  // empty: plain section
  std::optional<std::string> default_tag;
  std::vector<VariantSpec> variants;  // one unnamed variant for plain sections
  std::vector<FieldSpec> common;
};

double num(const ConfigValue& v) { return std::get<double>(v); }

Check positive() {
  return [](const ConfigValue& v) { return num(v) > 0.0 ? "" : "must be > 0"; };
}
Check nonnegative() {
  return [](const ConfigValue& v) { return num(v) >= 0.0 ? "" : "must be >= 0"; };
}
Check in_range(double lo, double hi) {
  return [lo, hi](const ConfigValue& v) {
    return num(v) >= lo && num(v) <= hi ? std::string{}
                                        : "must lie in [" + format_double(lo) + ", " + format_double(hi) + "]";
  };
}
Check at_least(double k) {
  return [k](const ConfigValue& v) { return num(v) >= k ? std::string{} : "must be >= " + format_double(k); };
}
Check list_at_least(double k) {
  return [k](const ConfigValue& v) {
    for (double x : std::get<std::vector<double>>(v))
      if (!(x >= k)) return "every entry must be >= " + format_double(k);
    return std::string{};
  };
}
Check list_positive() {
  return [](const ConfigValue& v) {
    for (double x : std::get<std::vector<double>>(v))
      if (!(x > 0.0)) return std::string{"every entry must be > 0"};
    return std::string{};
  };
}
Check one_of(std::vector<std::string> words) {
  return [words](const ConfigValue& v) {
    const auto& s = std::get<std::string>(v);
    if (std::find(words.begin(), words.end(), s) != words.end()) return std::string{};
    std::string msg = "must be one of:";
    for (const auto& w : words) msg += " " + w;
    return msg;
  };
}
Check expression() {
  return [](const ConfigValue& v) {
    try {
      Expression::parse(std::get<std::string>(v));
      return std::string{};
    } catch (const ExpressionError& e) {
      return std::string{"invalid expression: "} + e.what();
    }
  };
}

const std::vector<SectionSpec>& schema() {
  static const std::vector<SectionSpec> specs = [] {
    std::vector<SectionSpec> s;
    s.push_back({"coefficients",
                 "key",
                 std::nullopt,
                 {
                     {"toy_cubic", "b = x - 2x^3, sigma = |x^2 + x|^(1/2 + alpha)", {{"alpha", FieldType::Real, 0.0, in_range(0.0, 0.5)}}},
                     {"ou_meanfield", "b = -x + mean(mu), sigma constant", {{"sigma", FieldType::Real, 1.0, nonnegative()}}},
                     {"cir_like",
                      "b = kappa (theta - x), sigma = sqrt(max(x, 0))",
                      {{"kappa", FieldType::Real, 1.0, nullptr}, {"theta", FieldType::Real, 1.0, nullptr}}},
                     {"custom",
                      "expression strings in t, x, mean(mu), w1_to_dirac0(mu) with declared constants",
                      {{"drift", FieldType::Text, std::nullopt, expression()},
                       {"diffusion", FieldType::Text, std::nullopt, expression()},
                       {"C", FieldType::Real, 1.0, positive()},
                       {"l", FieldType::Real, 1.0, nonnegative()},
                       {"alpha", FieldType::Real, 0.0, in_range(0.0, 0.5)},
                       {"p0", FieldType::Real, 8.0, at_least(1.0)}}},
                 },
                 {}});
    s.push_back({"psi",
                 "key",
                 std::string{"none"},
                 {
                     {"none", "psi = 0, no constraint", {}},
                     {"indicator_interval",
                      "indicator of [lo, hi], lo <= 0 <= hi; lo, hi may be -inf / inf",
                      {{"lo", FieldType::ExtendedReal, std::nullopt, nullptr},
                       {"hi", FieldType::ExtendedReal, std::nullopt, nullptr}}},
                     {"abs_value", "psi = scale |x|", {{"scale", FieldType::Real, 1.0, positive()}}},
                     {"quadratic", "psi = (curvature / 2) x^2", {{"curvature", FieldType::Real, 1.0, nonnegative()}}},
                     {"even_power",
                      "psi = scale x^exponent, exponent even >= 2",
                      {{"exponent", FieldType::Int, 4.0, at_least(2.0)}, {"scale", FieldType::Real, 1.0, positive()}}},
                     {"max_affine",
                      "psi = max_i (slopes_i x + intercepts_i)",
                      {{"slopes", FieldType::RealList, std::nullopt, nullptr},
                       {"intercepts", FieldType::RealList, std::nullopt, nullptr}}},
                 },
                 {}});
    s.push_back({"initial",
                 "kind",
                 std::string{"deterministic"},
                 {
                     {"deterministic", "X_0 = x0", {{"x0", FieldType::Real, 0.0, nullptr}}},
                     {"uniform", "X_0 ~ U(lo, hi)", {{"lo", FieldType::Real, std::nullopt, nullptr}, {"hi", FieldType::Real, std::nullopt, nullptr}}},
                     {"gaussian", "X_0 ~ N(mean, sd^2)", {{"mean", FieldType::Real, 0.0, nullptr}, {"sd", FieldType::Real, 1.0, nonnegative()}}},
                 },
                 {{"a0", FieldType::Real, 0.0, nonnegative()}}});
    s.push_back({"scheme",
                 "kind",
                 std::string{"proximal"},
                 {
                     {"proximal", "explicit step followed by the resolvent with lambda = dt", {}},
                     {"penalized", "explicit step with the Moreau-Yosida gradient, n dt <= 2", {{"n", FieldType::Real, std::nullopt, positive()}}},
                 },
                 {{"taming", FieldType::Bool, true, nullptr}}});
    s.push_back({"grid",
                 "",
                 std::nullopt,
                 {{"", "", {{"T", FieldType::Real, std::nullopt, positive()}, {"dt", FieldType::Real, std::nullopt, positive()}}}},
                 {}});
    s.push_back({"experiment",
                 "kind",
                 std::nullopt,
                 {
                     {"simulate",
                      "independent paths of a measure-free SVI; paths and terminal CSVs",
                      {{"paths", FieldType::Int, 1.0, at_least(1.0)}, {"record", FieldType::Int, 1.0, at_least(0.0)}}},
                     {"particles",
                      "N-particle system; flow summary, paths and terminal measure CSVs",
                      {{"N", FieldType::Int, std::nullopt, at_least(1.0)}, {"record", FieldType::Int, 8.0, at_least(0.0)}}},
                     {"picard",
                      "fixed-point iteration on the measure flow",
                      {{"M", FieldType::Int, 2000.0, at_least(2.0)},
                       {"K_max", FieldType::Int, 15.0, at_least(1.0)},
                       {"tol", FieldType::Real, 1e-3, nonnegative()}}},
                     {"poc",
                      "propagation of chaos under synchronous coupling",
                      {{"N_list", FieldType::IntList, std::nullopt, list_at_least(1.0)},
                       {"M_ref", FieldType::Int, 16384.0, at_least(1.0)},
                       {"trials", FieldType::Int, 8.0, at_least(1.0)},
                       {"probe_particles", FieldType::Int, 16.0, at_least(1.0)}}},
                     {"validate",
                      "sampling checks of the growth and regularity assumptions",
                      {{"assumption", FieldType::Word, std::string{"auto"}, one_of({"auto", "local", "mean_field"})},
                       {"radii", FieldType::RealList, std::vector<double>{1.0, 2.5, 5.0, 10.0}, list_positive()},
                       {"x_samples", FieldType::Int, 160.0, at_least(4.0)}}},
                     {"convergence",
                      "penalized vs proximal over n, and dt self-convergence over dyadic levels",
                      {{"n_list", FieldType::RealList, std::vector<double>{4.0, 16.0, 64.0, 256.0}, list_positive()},
                       {"levels", FieldType::Int, 5.0, at_least(2.0)},
                       {"paths", FieldType::Int, 100.0, at_least(1.0)}}},
                 },
                 {}});
    return s;
  }();
  return specs;
}

const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::Real: return "a finite number";
    case FieldType::ExtendedReal: return "a number or inf / -inf";
    case FieldType::Int: return "an integer";
    case FieldType::Bool: return "true or false";
    case FieldType::Word: return "a word";
    case FieldType::Text: return "a quoted string";
    case FieldType::RealList: return "a list of finite numbers";
    case FieldType::IntList: return "a list of integers";
  }
  return "?";
}

bool is_int(double v) { return std::isfinite(v) && std::floor(v) == v && std::abs(v) <= kMaxExactInt; }

// Coerces a raw value to the field type; nullopt on mismatch.
std::optional<ConfigValue> coerce(const ConfigValue& v, FieldType t) {
  switch (t) {
    case FieldType::Real:
      if (auto* d = std::get_if<double>(&v); d && std::isfinite(*d)) return *d;
      return std::nullopt;
    case FieldType::ExtendedReal:
      if (auto* d = std::get_if<double>(&v)) return *d;
      return std::nullopt;
    case FieldType::Int:
      if (auto* d = std::get_if<double>(&v); d && is_int(*d)) return *d;
      return std::nullopt;
    case FieldType::Bool:
      if (auto* b = std::get_if<bool>(&v)) return *b;
      return std::nullopt;
    case FieldType::Word:
    case FieldType::Text:
      if (auto* s = std::get_if<std::string>(&v)) return *s;
      return std::nullopt;
    case FieldType::RealList:
    case FieldType::IntList: {
      std::vector<double> out;
      if (auto* d = std::get_if<double>(&v)) out.push_back(*d);
      else if (auto* l = std::get_if<std::vector<double>>(&v)) out = *l;
      else return std::nullopt;
      for (double x : out)
        if (t == FieldType::IntList ? !is_int(x) : !std::isfinite(x)) return std::nullopt;
      return out;
    }
  }
  return std::nullopt;
}

std::string describe_value(const ConfigValue& v) {
  if (auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (auto* s = std::get_if<std::string>(&v)) return "'" + *s + "'";
  return "a list";
}

std::string line_tag(int line) { return line > 0 ? " (line " + std::to_string(line) + ")" : ""; }

void apply_fields(const std::string& where, const std::vector<FieldSpec>& fields, const RawSection& raw,
                  ConfigSection& out, std::vector<std::string>& errors) {
  for (const auto& f : fields) {
    const auto it = raw.find(f.name);
    if (it == raw.end()) {
      if (f.fallback) out[f.name] = *f.fallback;
      else errors.push_back(where + " " + f.name + ": required field is missing");
      continue;
    }
    const auto v = coerce(it->second.value, f.type);
    if (!v) {
      errors.push_back(where + " " + f.name + line_tag(it->second.line) + ": expected " + type_name(f.type) + ", got " +
                       describe_value(it->second.value));
      continue;
    }
    if (f.check) {
      if (const std::string msg = f.check(*v); !msg.empty()) {
        errors.push_back(where + " " + f.name + line_tag(it->second.line) + ": " + msg);
        continue;
      }
    }
    out[f.name] = *v;
  }
}

ConfigSection validate_section(const SectionSpec& spec, const RawSection* raw_ptr, std::vector<std::string>& errors) {
  static const RawSection empty;
  const RawSection& raw = raw_ptr ? *raw_ptr : empty;
  const std::string where = "[" + spec.name + "]";
  ConfigSection out;

  const VariantSpec* variant = nullptr;
  if (spec.discriminator.empty()) {
    variant = &spec.variants.front();
  } else {
    std::string tags;
    for (const auto& v : spec.variants) tags += " " + v.tag;
    std::optional<std::string> tag = spec.default_tag;
    int line = 0;
    if (const auto it = raw.find(spec.discriminator); it != raw.end()) {
      line = it->second.line;
      if (auto* s = std::get_if<std::string>(&it->second.value)) tag = *s;
      else {
        errors.push_back(where + " " + spec.discriminator + line_tag(line) + ": expected a registry name, one of:" + tags);
        return out;
      }
    }
    if (!tag) {
      errors.push_back(where + " " + spec.discriminator + ": required field is missing; registry contains:" + tags);
      return out;
    }
    for (const auto& v : spec.variants)
      if (v.tag == *tag) variant = &v;
    if (!variant) {
      errors.push_back(where + " " + spec.discriminator + line_tag(line) + ": unknown entry '" + *tag +
                       "'; registry contains:" + tags);
      return out;
    }
    out[spec.discriminator] = *tag;
  }

  for (const auto& [key, entry] : raw) {
    if (key == spec.discriminator) continue;
    const auto known = [&](const std::vector<FieldSpec>& fs) {
      return std::any_of(fs.begin(), fs.end(), [&](const FieldSpec& f) { return f.name == key; });
    };
    if (!known(variant->fields) && !known(spec.common)) {
      std::string allowed;
      for (const auto* fs : {&variant->fields, &spec.common})
        for (const auto& f : *fs) allowed += " " + f.name;
      errors.push_back(where + " " + key + line_tag(entry.line) + ": unknown key" +
                       (allowed.empty() ? std::string{"; this entry takes no parameters"} : "; allowed:" + allowed));
    }
  }
  apply_fields(where, variant->fields, raw, out, errors);
  apply_fields(where, spec.common, raw, out, errors);
  return out;
}

ConfigSection* section_ptr(ScenarioConfig& cfg, const std::string& name) {
  if (name == "coefficients") return &cfg.coefficients;
  if (name == "psi") return &cfg.psi;
  if (name == "initial") return &cfg.initial;
  if (name == "scheme") return &cfg.scheme;
  if (name == "grid") return &cfg.grid;
  if (name == "experiment") return &cfg.experiment;
  return nullptr;
}

const ConfigSection& section_ref(const ScenarioConfig& cfg, const std::string& name) {
  return *section_ptr(const_cast<ScenarioConfig&>(cfg), name);
}

// Constraints spanning several fields or sections; only run once every
// section validated on its own.
void cross_validate(const ScenarioConfig& cfg, std::vector<std::string>& errors) {
  const auto attempt = [&](const std::string& where, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const InvalidParams& e) {
      errors.push_back(where + ": " + e.what());
    }
  };
  attempt("[coefficients]", [&] { build_coefficients(cfg); });
  attempt("[psi]", [&] { build_psi(cfg); });
  attempt("[initial]", [&] { build_initial(cfg).validate(); });
  attempt("[grid]", [&] { IncrementGrid{cfg.horizon(), cfg.dt()}; });
  attempt("[scheme]", [&] { build_scheme(cfg).validate(); });

  const auto& kind = cfg.experiment_kind();
  if (kind == "simulate" || kind == "convergence") {
    bool dependent = false;
    attempt("[coefficients]", [&] { dependent = build_coefficients(cfg).declared.measure_dependent; });
    if (dependent)
      errors.push_back("[experiment] kind: '" + kind + "' needs measure-free coefficients; use particles, picard or poc");
  }
  if (kind == "poc") {
    const auto& ns = cfg.list(cfg.experiment, "N_list");
    for (std::size_t i = 1; i < ns.size(); ++i)
      if (!(ns[i] > ns[i - 1])) {
        errors.push_back("[experiment] N_list: must be strictly increasing");
        break;
      }
    if (!ns.empty() && cfg.real(cfg.experiment, "M_ref") < *std::max_element(ns.begin(), ns.end()))
      errors.push_back("[experiment] M_ref: must be >= max(N_list)");
  }
  if (kind == "convergence") {
    for (double n : cfg.list(cfg.experiment, "n_list"))
      if (n * cfg.dt() > 2.0) {
        errors.push_back("[experiment] n_list: n * dt must be <= 2 for every n, got n = " + format_double(n));
        break;
      }
    const auto levels = cfg.count(cfg.experiment, "levels");
    if (levels > 30) errors.push_back("[experiment] levels: must be <= 30");
    else attempt("[experiment] levels", [&] { IncrementGrid{cfg.horizon(), std::ldexp(cfg.dt(), -static_cast<int>(levels - 1))}; });
  }
  if (kind == "validate") {
    const auto& a = cfg.word(cfg.experiment, "assumption");
    bool dependent = false;
    attempt("[coefficients]", [&] { dependent = build_coefficients(cfg).declared.measure_dependent; });
    if (a == "local" && dependent)
      errors.push_back("[experiment] assumption: 'local' needs measure-free coefficients");
  }
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return is_ident_char(c) || c == '-' || c == '.'; });
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string render(const ConfigValue& v) {
  if (auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (auto* s = std::get_if<std::string>(&v)) {
    const bool bare = is_ident_start(s->front()) && *s != "true" && *s != "false" &&
                      std::all_of(s->begin(), s->end(), is_word_char) && !parse_number(*s);
    return bare ? *s : quote(*s);
  }
  const auto& l = std::get<std::vector<double>>(v);
  std::string out;
  for (std::size_t i = 0; i < l.size(); ++i) out += (i ? ", " : "") + format_double(l[i]);
  return out;
}

}  // namespace

double ScenarioConfig::real(const ConfigSection& s, const std::string& key) const { return std::get<double>(s.at(key)); }

std::size_t ScenarioConfig::count(const ConfigSection& s, const std::string& key) const {
  return static_cast<std::size_t>(std::get<double>(s.at(key)));
}

const std::string& ScenarioConfig::word(const ConfigSection& s, const std::string& key) const {
  return std::get<std::string>(s.at(key));
}

const std::vector<double>& ScenarioConfig::list(const ConfigSection& s, const std::string& key) const {
  return std::get<std::vector<double>>(s.at(key));
}

bool ScenarioConfig::flag(const ConfigSection& s, const std::string& key) const { return std::get<bool>(s.at(key)); }

ScenarioConfig parse_config(std::string_view text, const std::string& origin) {
  const RawConfig raw = lex(text, origin);
  std::vector<std::string> errors;
  ScenarioConfig cfg;

  const std::vector<FieldSpec> top{
      {"name", FieldType::Word, std::nullopt,
       [](const ConfigValue& v) {
         return valid_name(std::get<std::string>(v)) ? "" : "must use letters, digits, '_', '-' or '.'";
       }},
      {"seed", FieldType::Int, 1.0, in_range(0.0, kMaxExactInt)},
      {"output_dir", FieldType::Text, std::string{"out"}, nullptr},
  };
  ConfigSection top_out;
  for (const auto& [key, entry] : raw.top)
    if (key != "name" && key != "seed" && key != "output_dir")
      errors.push_back(key + line_tag(entry.line) + ": unknown top-level key; allowed: name seed output_dir");
  // Bare-word names would otherwise fail the Word coercion when numeric.
  RawSection top_raw = raw.top;
  if (auto it = top_raw.find("name"); it != top_raw.end())
    if (auto* d = std::get_if<double>(&it->second.value)) it->second.value = format_double(*d);
  apply_fields("top-level", top, top_raw, top_out, errors);
  if (top_out.count("name")) cfg.name = std::get<std::string>(top_out.at("name"));
  if (top_out.count("seed")) cfg.seed = static_cast<std::uint64_t>(std::get<double>(top_out.at("seed")));
  if (top_out.count("output_dir")) cfg.output_dir = std::get<std::string>(top_out.at("output_dir"));

  for (const auto& [name, line] : raw.section_lines) {
    const bool known = std::any_of(schema().begin(), schema().end(), [&](const SectionSpec& s) { return s.name == name; });
    if (!known)
      errors.push_back("[" + name + "]" + line_tag(line) +
                       ": unknown section; allowed: coefficients psi initial scheme grid experiment");
  }
  for (const auto& spec : schema()) {
    const auto it = raw.sections.find(spec.name);
    if (it == raw.sections.end() && !spec.default_tag && spec.name != "grid" && spec.name != "coefficients" &&
        spec.name != "experiment")
      continue;
    *section_ptr(cfg, spec.name) = validate_section(spec, it == raw.sections.end() ? nullptr : &it->second, errors);
  }
  if (errors.empty()) cross_validate(cfg, errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  const auto builtin = [](const std::string& name) -> const BuiltinScenario* {
    for (const auto& b : builtin_scenarios())
      if (b.name == name) return &b;
    return nullptr;
  };
  std::string name;
  if (path.rfind("builtin:", 0) == 0) {
    name = path.substr(8);
  } else {
    std::ifstream in{path, std::ios::binary};
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      return parse_config(ss.str(), path);
    }
    name = std::filesystem::path{path}.filename().string();
    if (const auto dot = name.rfind(".scenario"); dot != std::string::npos && dot + 9 == name.size()) name.resize(dot);
    else name.clear();
  }
  if (const auto* b = name.empty() ? nullptr : builtin(name)) return parse_config(b->text, "builtin:" + b->name);
  std::string known;
  for (const auto& b : builtin_scenarios()) known += " " + b.name;
  throw ConfigError("cannot read scenario '" + path + "'; built-in scenarios:" + known);
}

std::string serialize(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "name = " << render(cfg.name) << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "output_dir = " << quote(cfg.output_dir) << '\n';
  for (const auto& spec : schema()) {
    const ConfigSection& s = section_ref(cfg, spec.name);
    if (s.empty()) continue;
    os << "\n[" << spec.name << "]\n";
    if (!spec.discriminator.empty()) os << spec.discriminator << " = " << render(s.at(spec.discriminator)) << '\n';
    for (const auto& [k, v] : s)
      if (k != spec.discriminator) os << k << " = " << render(v) << '\n';
  }
  return os.str();
}

std::string config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CoefficientPair build_coefficients(const ScenarioConfig& cfg) {
  const auto& s = cfg.coefficients;
  const auto& key = cfg.word(s, "key");
  if (key == "toy_cubic") return toy_cubic(cfg.real(s, "alpha"));
  if (key == "ou_meanfield") return ou_meanfield(cfg.real(s, "sigma"));
  if (key == "cir_like") return cir_like(cfg.real(s, "kappa"), cfg.real(s, "theta"));
  if (key == "custom") {
    DeclaredConstants d;
    d.C = cfg.real(s, "C");
    d.l = cfg.real(s, "l");
    d.alpha = cfg.real(s, "alpha");
    d.p0 = cfg.real(s, "p0");
    return from_expressions(cfg.word(s, "drift"), cfg.word(s, "diffusion"), d);
  }
  throw InvalidParams("unknown coefficient key '" + key + "'");
}

ConvexSpec build_psi(const ScenarioConfig& cfg) {
  const auto& s = cfg.psi;
  const auto& key = cfg.word(s, "key");
  if (key == "none") return ConvexSpec::zero();
  if (key == "indicator_interval")
    return ConvexSpec::indicator(ExtReal::from_double(cfg.real(s, "lo")), ExtReal::from_double(cfg.real(s, "hi")));
  if (key == "abs_value") return ConvexSpec::abs_value(cfg.real(s, "scale"));
  if (key == "quadratic") return ConvexSpec::quadratic(cfg.real(s, "curvature"));
  if (key == "even_power") return ConvexSpec::even_power(static_cast<int>(cfg.real(s, "exponent")), cfg.real(s, "scale"));
  if (key == "max_affine") {
    const auto& slopes = cfg.list(s, "slopes");
    const auto& intercepts = cfg.list(s, "intercepts");
    if (slopes.size() != intercepts.size()) throw InvalidParams("slopes and intercepts differ in length");
    std::vector<AffinePiece> pieces;
    for (std::size_t i = 0; i < slopes.size(); ++i) pieces.push_back({slopes[i], intercepts[i]});
    return ConvexSpec::max_affine(std::move(pieces));
  }
  throw InvalidParams("unknown psi key '" + key + "'");
}

InitialCondition build_initial(const ScenarioConfig& cfg) {
  const auto& s = cfg.initial;
  const auto& kind = cfg.word(s, "kind");
  InitialCondition ic;
  if (kind == "deterministic") ic = InitialCondition::deterministic(cfg.real(s, "x0"));
  else if (kind == "uniform") ic = InitialCondition::uniform(cfg.real(s, "lo"), cfg.real(s, "hi"));
  else if (kind == "gaussian") ic = InitialCondition::gaussian(cfg.real(s, "mean"), cfg.real(s, "sd"));
  else throw InvalidParams("unknown initial kind '" + kind + "'");
  ic.a0 = cfg.real(s, "a0");
  return ic;
}

SchemeConfig build_scheme(const ScenarioConfig& cfg) {
  const auto& s = cfg.scheme;
  const bool taming = cfg.flag(s, "taming");
  if (cfg.word(s, "kind") == "penalized") return SchemeConfig::penalized(cfg.real(s, "n"), cfg.dt(), taming);
  return SchemeConfig::proximal(cfg.dt(), taming);
}

namespace {

std::vector<RegistryEntry> registry_of(const std::string& section) {
  std::vector<RegistryEntry> out;
  for (const auto& spec : schema()) {
    if (spec.name != section) continue;
    for (const auto& v : spec.variants) {
      RegistryEntry e{v.tag, v.description, {}};
      for (const auto& f : v.fields) e.parameters.push_back(f.name);
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace

std::vector<RegistryEntry> coefficient_registry() { return registry_of("coefficients"); }
std::vector<RegistryEntry> psi_registry() { return registry_of("psi"); }
std::vector<RegistryEntry> experiment_registry() { return registry_of("experiment"); }

}  // namespace svi
