#include "nitm/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace nitm::data {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_trimmed(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

// CSV field splitting with double-quote handling ("" escapes a quote).
std::vector<std::string> split_csv(const std::string& s, int line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw parse_error("unterminated quote", line);
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos == s.size();
}

bool is_missing(const std::string& s) { return s == "?"; }

struct KeelAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;
};

// "@attribute name real [a, b]" / "@attribute name {v1, v2}" / integer/real
KeelAttribute parse_attribute_line(const std::string& body, int line) {
  KeelAttribute attr;
  std::size_t i = 0;
  while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != '{')
    ++i;
  attr.name = trim(body.substr(0, i));
  if (attr.name.empty()) throw parse_error("@attribute without a name", line);
  std::string rest = trim(body.substr(i));
  if (!rest.empty() && rest.front() == '{') {
    const std::size_t close = rest.find('}');
    if (close == std::string::npos) throw parse_error("unterminated nominal value set", line);
    attr.nominal = true;
    for (const std::string& v : split_trimmed(rest.substr(1, close - 1), ',')) {
      if (v.empty()) throw parse_error("empty nominal value", line);
      attr.values.push_back(v);
    }
    if (attr.values.empty()) throw parse_error("empty nominal value set", line);
    return attr;
  }
  const std::string kind = lower(rest.substr(0, rest.find_first_of(" \t[")));
  if (kind != "real" && kind != "integer" && kind != "numeric") {
    throw parse_error("unsupported attribute type '" + rest + "'", line);
  }
  return attr;
}

}  // namespace

RawDataset parse_keel(std::istream& in, const std::string& stream_name) {
  RawDataset ds;
  ds.name = stream_name;

  std::vector<KeelAttribute> attrs;
  std::vector<std::string> output_names;
  bool in_data = false;
  int data_line = 0;
  std::string line;
  int line_no = 0;
  std::vector<std::string> raw_rows;
  std::vector<int> raw_row_lines;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    if (!in_data && t[0] == '@') {
      const std::size_t sp = t.find_first_of(" \t");
      const std::string tag = lower(sp == std::string::npos ? t : t.substr(0, sp));
      const std::string body = sp == std::string::npos ? "" : trim(t.substr(sp));
      if (tag == "@relation") {
        if (!body.empty()) ds.name = body;
      } else if (tag == "@attribute") {
        attrs.push_back(parse_attribute_line(body, line_no));
      } else if (tag == "@inputs") {
        // informative; attribute order is authoritative
      } else if (tag == "@outputs" || tag == "@output") {
        output_names = split_trimmed(body, ',');
      } else if (tag == "@data") {
        in_data = true;
        data_line = line_no;
      } else {
        throw parse_error("unknown header tag '" + tag + "'", line_no);
      }
      continue;
    }
    if (!in_data) throw parse_error("data row before @data section", line_no);
    raw_rows.push_back(t);
    raw_row_lines.push_back(line_no);
  }
  if (!in_data) throw parse_error("missing @data section", 0);
  if (attrs.empty()) throw parse_error("no @attribute declarations", 0);

  // class column: the single @outputs name, else the last attribute
  std::size_t label_col = attrs.size() - 1;
  if (!output_names.empty()) {
    if (output_names.size() != 1) {
      throw parse_error("expected exactly one output attribute", 0);
    }
    bool found = false;
    for (std::size_t j = 0; j < attrs.size(); ++j) {
      if (attrs[j].name == output_names[0]) {
        label_col = j;
        found = true;
        break;
      }
    }
    if (!found) throw parse_error("output attribute '" + output_names[0] + "' not declared", 0);
  }
  if (!attrs[label_col].nominal || attrs[label_col].values.size() != 2) {
    throw parse_error("class attribute must be nominal with exactly 2 values", data_line);
  }
  ds.class_values = {attrs[label_col].values[0], attrs[label_col].values[1]};

  for (std::size_t j = 0; j < attrs.size(); ++j) {
    if (j == label_col) continue;
    ds.attr_names.push_back(attrs[j].name);
    ds.attr_kinds.push_back(attrs[j].nominal ? AttrKind::nominal : AttrKind::numeric);
    ds.nominal_values.push_back(attrs[j].values);
  }

  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    const int ln = raw_row_lines[r];
    const std::vector<std::string> fields = split_csv(raw_rows[r], ln);
    if (fields.size() != attrs.size()) {
      throw parse_error("expected " + std::to_string(attrs.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        ln);
    }
    if (std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return is_missing(f); })) {
      ds.warnings.push_back("line " + std::to_string(ln) + ": dropped row with missing values");
      continue;
    }
    std::vector<std::string> row;
    int label = -1;
    for (std::size_t j = 0; j < attrs.size(); ++j) {
      if (j == label_col) {
        if (fields[j] == ds.class_values[0]) {
          label = 0;
        } else if (fields[j] == ds.class_values[1]) {
          label = 1;
        } else {
          throw parse_error("unknown class value '" + fields[j] + "'", ln);
        }
        continue;
      }
      const KeelAttribute& a = attrs[j];
      if (a.nominal) {
        if (std::find(a.values.begin(), a.values.end(), fields[j]) == a.values.end()) {
          throw parse_error(
              "unknown nominal value '" + fields[j] + "' in column '" + a.name + "'", ln);
        }
      } else {
        double v;
        if (!parse_double(fields[j], v)) {
          throw parse_error("expected a number in column '" + a.name + "', got '" + fields[j] + "'",
                            ln);
        }
      }
      row.push_back(fields[j]);
    }
    ds.cells.push_back(std::move(row));
    ds.label_index.push_back(label);
  }
  return ds;
}

RawDataset parse_keel(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("cannot open '" + path.string() + "'", 0);
  return parse_keel(f, path.stem().string());
}

RawDataset parse_csv(std::istream& in, const std::string& label_column,
                     const std::string& positive_label, const std::string& stream_name) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw parse_error("missing header row", 0);
  ++line_no;
  const std::vector<std::string> header = split_csv(line, line_no);
  if (header.size() < 2) throw parse_error("need at least one feature column and a label", 1);
  for (const std::string& h : header) {
    if (h.empty()) throw parse_error("empty header field", 1);
  }

  std::size_t label_col = header.size() - 1;
  if (!label_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) {
      throw parse_error("label column '" + label_column + "' not in header", 1);
    }
    label_col = static_cast<std::size_t>(it - header.begin());
  }

  RawDataset ds;
  ds.name = stream_name;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv(line, line_no);
    if (fields.size() != header.size()) {
      throw parse_error("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    if (std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return is_missing(f); })) {
      ds.warnings.push_back("line " + std::to_string(line_no) + ": dropped row with missing values");
      continue;
    }
    labels.push_back(fields[label_col]);
    fields.erase(fields.begin() + static_cast<std::ptrdiff_t>(label_col));
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw parse_error("no data rows", 0);

  // two distinct label values, positive first
  std::vector<std::string> label_values;
  for (const std::string& l : labels) {
    if (std::find(label_values.begin(), label_values.end(), l) == label_values.end()) {
      label_values.push_back(l);
    }
  }
  if (label_values.size() != 2) {
    throw parse_error("expected exactly 2 label values, found " +
                          std::to_string(label_values.size()),
                      0);
  }
  if (!positive_label.empty()) {
    const auto it = std::find(label_values.begin(), label_values.end(), positive_label);
    if (it == label_values.end()) {
      throw parse_error("positive label '" + positive_label + "' not present", 0);
    }
    std::iter_swap(label_values.begin(), it);
  }
  ds.class_values = {label_values[0], label_values[1]};
  for (const std::string& l : labels) {
    ds.label_index.push_back(l == ds.class_values[0] ? 0 : 1);
  }

  const std::size_t ncols = header.size() - 1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_col) ds.attr_names.push_back(header[j]);
  }
  ds.attr_kinds.assign(ncols, AttrKind::numeric);
  ds.nominal_values.assign(ncols, {});
  for (std::size_t j = 0; j < ncols; ++j) {
    double v;
    const bool numeric = std::all_of(rows.begin(), rows.end(),
                                     [&](const std::vector<std::string>& r) {
                                       return parse_double(r[j], v);
                                     });
    if (!numeric) {
      ds.attr_kinds[j] = AttrKind::nominal;
      for (const std::vector<std::string>& r : rows) {
        if (std::find(ds.nominal_values[j].begin(), ds.nominal_values[j].end(), r[j]) ==
            ds.nominal_values[j].end()) {
          ds.nominal_values[j].push_back(r[j]);
        }
      }
    }
  }
  ds.cells = std::move(rows);
  return ds;
}

RawDataset parse_csv(const std::filesystem::path& path, const std::string& label_column,
                     const std::string& positive_label) {
  std::ifstream f(path);
  if (!f) throw parse_error("cannot open '" + path.string() + "'", 0);
  return parse_csv(f, label_column, positive_label, path.stem().string());
}

namespace {

// nominal -> 1-based declared index; numeric -> parsed value
double encode_cell(const NormalizationParams& p, std::size_t col, const std::string& cell) {
  if (p.attr_kinds[col] == AttrKind::nominal) {
    const auto& vals = p.nominal_values[col];
    const auto it = std::find(vals.begin(), vals.end(), cell);
    if (it == vals.end()) {
      throw std::invalid_argument("unseen nominal value '" + cell + "' in column '" +
                                  p.attr_names[col] + "'");
    }
    return static_cast<double>(it - vals.begin()) + 1.0;
  }
  double v;
  if (!parse_double(cell, v)) {
    throw std::invalid_argument("non-numeric value '" + cell + "' in column '" +
                                p.attr_names[col] + "'");
  }
  return v;
}

}  // namespace

PreparedDataset encode_and_prepare(const RawDataset& raw, std::span<const std::size_t> fit_indices) {
  if (fit_indices.empty()) throw std::invalid_argument("encode_and_prepare: empty fit set");
  for (std::size_t i : fit_indices) {
    if (i >= raw.rows()) throw std::invalid_argument("encode_and_prepare: fit index out of range");
  }
  const std::size_t m = raw.rows();
  const std::size_t d = raw.columns();

  PreparedDataset out;
  out.params.attr_names = raw.attr_names;
  out.params.attr_kinds = raw.attr_kinds;
  out.params.nominal_values = raw.nominal_values;
  out.params.class_values = raw.class_values;
  out.params.mean.assign(d, 0.0);
  out.params.scale.assign(d, 1.0);

  Matrix coded(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) coded(i, j) = encode_cell(out.params, j, raw.cells[i][j]);
  }

  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i : fit_indices) mean += coded(i, j);
    mean /= static_cast<double>(fit_indices.size());
    double nsq = 0.0;
    for (std::size_t i : fit_indices) {
      const double c = coded(i, j) - mean;
      nsq += c * c;
    }
    const double scale = nsq > 0.0 ? std::sqrt(nsq) : 1.0;
    out.params.mean[j] = mean;
    out.params.scale[j] = scale;
  }

  out.features = apply_preparation(out.params, raw);
  out.labels = encode_labels(out.params, raw);
  return out;
}

Matrix apply_preparation(const NormalizationParams& params, const RawDataset& raw) {
  if (raw.columns() != params.columns()) {
    throw std::invalid_argument("apply_preparation: column count mismatch");
  }
  const std::size_t m = raw.rows();
  const std::size_t d = params.columns();
  Matrix out(m, d + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out(i, j) = (encode_cell(params, j, raw.cells[i][j]) - params.mean[j]) / params.scale[j];
    }
    out(i, d) = 1.0;  // bias
  }
  return out;
}

std::vector<int> encode_labels(const NormalizationParams& params, const RawDataset& raw) {
  std::vector<int> labels(raw.rows());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const std::string& s = raw.class_values[static_cast<std::size_t>(raw.label_index[i])];
    if (s == params.class_values[0]) {
      labels[i] = 1;
    } else if (s == params.class_values[1]) {
      labels[i] = -1;
    } else {
      throw std::invalid_argument("encode_labels: unknown class value '" + s + "'");
    }
  }
  return labels;
}

}  // namespace nitm::data
