#include "nitm/model_file.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nitm::model_file {

namespace {

constexpr const char* kMagic = "nitm-model";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// tokens are space separated; escape backslash and whitespace
std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out.empty() ? std::string("\\e") : out;
}

std::string unescape(const std::string& s, int line) {
  if (s == "\\e") return "";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 >= s.size()) throw data::parse_error("dangling escape", line);
    switch (s[++i]) {
      case '\\': out.push_back('\\'); break;
      case 's': out.push_back(' '); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw data::parse_error("unknown escape", line);
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // next non-empty line split into tokens
  std::vector<std::string> next(const std::string& expected_key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.empty()) continue;
      std::istringstream is(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (is >> tok) tokens.push_back(tok);
      if (tokens.empty()) continue;
      if (tokens[0] != expected_key) {
        throw data::parse_error("expected key '" + expected_key + "', got '" + tokens[0] + "'",
                                line_);
      }
      return tokens;
    }
    throw data::parse_error("unexpected end of file, expected key '" + expected_key + "'", line_);
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  int line_ = 0;
};

double parse_double_tok(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw data::parse_error("malformed number '" + s + "'", line);
  }
}

long parse_long_tok(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw data::parse_error("malformed integer '" + s + "'", line);
  }
}

void need(bool cond, const std::string& what, int line) {
  if (!cond) throw data::parse_error(what, line);
}

}  // namespace

void write_text(std::ostream& out, const ModelFile& m) {
  out << kMagic << ' ' << m.version << '\n';
  out << "nu " << fmt_double(m.nu) << '\n';
  out << "q_prime " << fmt_double(m.q_prime) << '\n';
  out << "C " << fmt_double(m.c_reg) << '\n';
  out << "seed " << m.seed << '\n';
  out << "termination " << (m.termination.empty() ? "unknown" : m.termination) << '\n';
  out << "iterations " << m.iterations << '\n';
  out << "objective " << fmt_double(m.objective) << '\n';
  out << "gradient_norm " << fmt_double(m.gradient_norm) << '\n';
  out << "classes " << escape(m.params.class_values[0]) << ' ' << escape(m.params.class_values[1])
      << '\n';
  out << "attributes " << m.params.columns() << '\n';
  for (std::size_t j = 0; j < m.params.columns(); ++j) {
    out << "attr " << j << ' ' << escape(m.params.attr_names[j]) << ' '
        << (m.params.attr_kinds[j] == data::AttrKind::nominal ? "nominal" : "numeric") << ' '
        << fmt_double(m.params.mean[j]) << ' ' << fmt_double(m.params.scale[j]);
    if (m.params.attr_kinds[j] == data::AttrKind::nominal) {
      out << ' ' << m.params.nominal_values[j].size();
      for (const std::string& v : m.params.nominal_values[j]) out << ' ' << escape(v);
    }
    out << '\n';
  }
  out << "mu " << m.mu.size() << '\n';
  for (double v : m.mu) out << "w " << fmt_double(v) << '\n';
}

ModelFile read_text(std::istream& in) {
  Reader r(in);
  ModelFile m;

  auto head = r.next(kMagic);
  need(head.size() == 2, "magic line needs a version", r.line());
  m.version = static_cast<int>(parse_long_tok(head[1], r.line()));
  need(m.version == 1, "unsupported model version " + head[1], r.line());

  auto one = [&](const char* key) {
    auto t = r.next(key);
    need(t.size() == 2, std::string("key '") + key + "' needs exactly one value", r.line());
    return t[1];
  };
  m.nu = parse_double_tok(one("nu"), r.line());
  m.q_prime = parse_double_tok(one("q_prime"), r.line());
  m.c_reg = parse_double_tok(one("C"), r.line());
  m.seed = static_cast<std::uint64_t>(parse_long_tok(one("seed"), r.line()));
  m.termination = one("termination");
  m.iterations = static_cast<int>(parse_long_tok(one("iterations"), r.line()));
  m.objective = parse_double_tok(one("objective"), r.line());
  m.gradient_norm = parse_double_tok(one("gradient_norm"), r.line());

  auto cls = r.next("classes");
  need(cls.size() == 3, "classes needs exactly two values", r.line());
  m.params.class_values = {unescape(cls[1], r.line()), unescape(cls[2], r.line())};

  const long ncols = parse_long_tok(one("attributes"), r.line());
  need(ncols >= 0, "negative attribute count", r.line());
  for (long j = 0; j < ncols; ++j) {
    auto t = r.next("attr");
    need(t.size() >= 6, "attr needs index, name, kind, mean, scale", r.line());
    need(parse_long_tok(t[1], r.line()) == j, "attr index out of order", r.line());
    m.params.attr_names.push_back(unescape(t[2], r.line()));
    const bool nominal = t[3] == "nominal";
    need(nominal || t[3] == "numeric", "attr kind must be numeric or nominal", r.line());
    m.params.attr_kinds.push_back(nominal ? data::AttrKind::nominal : data::AttrKind::numeric);
    m.params.mean.push_back(parse_double_tok(t[4], r.line()));
    m.params.scale.push_back(parse_double_tok(t[5], r.line()));
    std::vector<std::string> values;
    if (nominal) {
      need(t.size() >= 7, "nominal attr needs a value count", r.line());
      const long nvals = parse_long_tok(t[6], r.line());
      need(static_cast<long>(t.size()) == 7 + nvals, "nominal value count mismatch", r.line());
      for (long v = 0; v < nvals; ++v) values.push_back(unescape(t[7 + v], r.line()));
    } else {
      need(t.size() == 6, "numeric attr takes no extra fields", r.line());
    }
    m.params.nominal_values.push_back(std::move(values));
  }

  const long nmu = parse_long_tok(one("mu"), r.line());
  need(nmu >= 1, "mu needs at least one weight", r.line());
  need(nmu == ncols + 1, "mu length must be attribute count plus bias", r.line());
  for (long i = 0; i < nmu; ++i) m.mu.push_back(parse_double_tok(one("w"), r.line()));
  return m;
}

void save(const std::filesystem::path& path, const ModelFile& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write model file '" + path.string() + "'");
  write_text(f, m);
  if (!f.good()) throw std::runtime_error("failed writing model file '" + path.string() + "'");
}

ModelFile load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open model file '" + path.string() + "'");
  return read_text(f);
}

}  // namespace nitm::model_file
