#include "specfile.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace cn2 {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SpecError(ErrorCode::Syntax, line, "expected a number, got '" + s + "'");
  }
}

struct BoxSpec {
  std::vector<double> lo, hi;
  std::array<bool, 4> periodic{};
  int line = 0;
};

struct MetricEntry {
  int i, j;
  std::string expr;
  int line;
};

struct BlockSpec {
  std::string name;
  BoxSpec box;
  int nullity_axis = -1;
};

void parse_box(const std::string& text, int n, BoxSpec& box, int line) {
  auto axes = split(text, ",");
  if (static_cast<int>(axes.size()) != n)
    throw SpecError(ErrorCode::DimensionMismatch, line, "box needs " + std::to_string(n) + " 'lo hi' pairs");
  for (auto& a : axes) {
    auto p = split(a, " \t");
    if (p.size() != 2) throw SpecError(ErrorCode::Syntax, line, "expected 'lo hi' in box, got '" + trim(a) + "'");
    double lo = to_number(p[0], line), hi = to_number(p[1], line);
    if (!(lo < hi)) throw SpecError(ErrorCode::BadParams, line, "box axis with lo >= hi");
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }
  box.line = line;
}

int coord_index(const std::vector<std::string>& coords, const std::string& name, int line) {
  auto it = std::find(coords.begin(), coords.end(), name);
  if (it == coords.end()) throw SpecError(ErrorCode::UnknownIdentifier, line, "unknown coordinate '" + name + "'");
  return static_cast<int>(it - coords.begin());
}

void parse_periodic(const std::string& text, const std::vector<std::string>& coords, std::array<bool, 4>& out,
                    int line) {
  for (auto& name : split(text, " ,\t")) {
    if (name == "none") continue;
    out[coord_index(coords, name, line)] = true;
  }
}

}  // namespace

Atlas parse_spec(const std::string& text) {
  std::istringstream in(text);
  std::string raw, section, section_arg;
  int line = 0;
  int n = 0;
  int dim_line = 0;
  std::vector<std::string> coords;
  BoxSpec chart_box;
  std::string label = "spec";
  double margin = -1.0;
  std::map<std::string, std::vector<MetricEntry>> metrics;  // "" for the chart metric
  std::vector<BlockSpec> blocks;
  struct GlueLine {
    std::string text;
    int line;
  };
  std::vector<GlueLine> glue_lines;
  bool have_blocks = false;

  auto need_dim = [&](int ln) {
    if (n == 0) throw SpecError(ErrorCode::Syntax, ln, "dimension must be given first in [chart]");
  };

  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw SpecError(ErrorCode::Syntax, line, "unterminated section header");
      auto parts = split(s.substr(1, s.size() - 2), " \t");
      if (parts.empty()) throw SpecError(ErrorCode::Syntax, line, "empty section header");
      section = parts[0];
      section_arg = parts.size() > 1 ? parts[1] : "";
      if (section != "chart" && section != "metric" && section != "blocks" && section != "glue")
        throw SpecError(ErrorCode::Syntax, line, "unknown section [" + section + "]");
      if (section != "metric" && parts.size() > 1)
        throw SpecError(ErrorCode::Syntax, line, "section [" + section + "] takes no name");
      if (section == "blocks") have_blocks = true;
      continue;
    }
    if (section.empty()) throw SpecError(ErrorCode::Syntax, line, "content before the first section");

    if (section == "chart") {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw SpecError(ErrorCode::Syntax, line, "expected key = value");
      std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
      if (key == "dimension") {
        double d = to_number(val, line);
        if (d != std::floor(d) || d < 2 || d > 4) throw SpecError(ErrorCode::BadParams, line, "dimension must be 2, 3 or 4");
        n = static_cast<int>(d);
        dim_line = line;
      } else if (key == "coords") {
        need_dim(line);
        coords = split(val, " ,\t");
        if (static_cast<int>(coords.size()) != n)
          throw SpecError(ErrorCode::DimensionMismatch, line, "expected " + std::to_string(n) + " coordinate names");
      } else if (key == "box") {
        need_dim(line);
        parse_box(val, n, chart_box, line);
      } else if (key == "periodic") {
        need_dim(line);
        if (coords.empty()) coords = default_coords(n);
        parse_periodic(val, coords, chart_box.periodic, line);
      } else if (key == "label") {
        label = val;
      } else if (key == "margin") {
        margin = to_number(val, line);
        if (!(margin > 0)) throw SpecError(ErrorCode::BadParams, line, "margin must be positive");
      } else {
        throw SpecError(ErrorCode::Syntax, line, "unknown [chart] key '" + key + "'");
      }
    } else if (section == "metric") {
      need_dim(line);
      auto eq = s.find('=');
      if (eq == std::string::npos) throw SpecError(ErrorCode::Syntax, line, "expected 'g i j = <expr>'");
      auto lhs = split(s.substr(0, eq), " \t");
      if (lhs.size() != 3 || lhs[0] != "g") throw SpecError(ErrorCode::Syntax, line, "expected 'g i j = <expr>'");
      int i = static_cast<int>(to_number(lhs[1], line)), j = static_cast<int>(to_number(lhs[2], line));
      if (i < 1 || i > n || j < 1 || j > n) throw SpecError(ErrorCode::BadParams, line, "metric index out of range");
      metrics[section_arg].push_back({i - 1, j - 1, trim(s.substr(eq + 1)), line});
    } else if (section == "blocks") {
      need_dim(line);
      if (coords.empty()) coords = default_coords(n);
      auto words = split(s, " \t");
      if (words.size() < 3 || words[1] != "box" || s.find('=') == std::string::npos)
        throw SpecError(ErrorCode::Syntax, line, "expected 'NAME box = lo hi, ...'");
      BlockSpec b;
      b.name = words[0];
      for (auto& other : blocks)
        if (other.name == b.name) throw SpecError(ErrorCode::BadParams, line, "duplicate block '" + b.name + "'");
      std::string rest = trim(s.substr(s.find('=') + 1));
      std::string box_text = rest, per_text, null_text;
      auto cut = [&](const std::string& key, std::string& out) {
        auto p = box_text.find(key);
        if (p == std::string::npos) return;
        std::string tail = box_text.substr(p + key.size());
        box_text = box_text.substr(0, p);
        auto eq2 = tail.find('=');
        if (eq2 == std::string::npos) throw SpecError(ErrorCode::Syntax, line, "expected '" + key + " = ...'");
        out = trim(tail.substr(eq2 + 1));
      };
      cut("nullity", null_text);
      cut("periodic", per_text);
      parse_box(trim(box_text), n, b.box, line);
      if (!per_text.empty()) parse_periodic(per_text, coords, b.box.periodic, line);
      if (!null_text.empty()) b.nullity_axis = coord_index(coords, null_text, line);
      blocks.push_back(std::move(b));
    } else if (section == "glue") {
      glue_lines.push_back({s, line});
    }
  }

  if (n == 0) throw SpecError(ErrorCode::Syntax, line, "missing [chart] dimension");
  if (coords.empty()) coords = default_coords(n);
  (void)dim_line;

  auto build_field = [&](const std::string& name, const BoxSpec& box, int ln) {
    if (box.lo.empty()) throw SpecError(ErrorCode::Syntax, ln, "missing box");
    ChartSpec chart = ChartSpec::box(coords, box.lo, box.hi, box.periodic);
    std::vector<expr::Expr> comps(n * n);
    auto it = metrics.find(name);
    if (it != metrics.end()) {
      for (const auto& e : it->second) {
        expr::Expr ex;
        try {
          ex = expr::parse(e.expr, coords).root;
        } catch (const expr::SyntaxError& err) {
          throw SpecError(ErrorCode::Syntax, e.line, "column " + std::to_string(err.offset()) + ": " + err.what());
        } catch (const Error& err) {
          throw SpecError(err.code(), e.line, err.what());
        }
        if (comps[e.i * n + e.j]) throw SpecError(ErrorCode::BadParams, e.line, "metric entry given twice");
        comps[e.i * n + e.j] = ex;
        if (e.i != e.j) {
          auto& mirror = comps[e.j * n + e.i];
          if (mirror && !expr::structurally_equal(mirror, ex))
            throw SpecError(ErrorCode::BadParams, e.line, "metric entries (i,j) and (j,i) differ");
          mirror = ex;
        }
      }
    }
    try {
      return MetricField::from_exprs(std::move(chart), std::move(comps), name.empty() ? label : name);
    } catch (const Error& err) {
      throw SpecError(err.code(), ln, err.what());
    }
  };

  if (!have_blocks) {
    for (auto& [name, entries] : metrics)
      if (!name.empty()) throw SpecError(ErrorCode::BadParams, entries.front().line, "[metric " + name + "] without [blocks]");
    if (!glue_lines.empty()) throw SpecError(ErrorCode::BadParams, glue_lines.front().line, "[glue] without [blocks]");
    Atlas at = Atlas::from_field(build_field("", chart_box, chart_box.line));
    at.label = label;
    if (margin > 0) at.margin = margin;
    return at;
  }

  if (blocks.empty()) throw SpecError(ErrorCode::Syntax, line, "[blocks] lists no blocks");
  if (metrics.count("")) throw SpecError(ErrorCode::BadParams, metrics[""].front().line, "unnamed [metric] alongside [blocks]");
  Atlas at;
  at.dim = n;
  at.label = label;
  double m = 1e300;
  for (const auto& b : blocks) {
    auto f = build_field(b.name, b.box, b.box.line);
    at.blocks.push_back({f, Vec::Map(b.box.lo.data(), n), b.name, b.nullity_axis});
    for (int a = 0; a < n; ++a) m = std::min(m, (b.box.hi[a] - b.box.lo[a]) / 2);
  }
  for (auto& [name, entries] : metrics)
    if (std::none_of(blocks.begin(), blocks.end(), [&](auto& b) { return b.name == name; }))
      throw SpecError(ErrorCode::UnknownIdentifier, entries.front().line, "metric for unknown block '" + name + "'");
  at.margin = margin > 0 ? margin : m;
  auto block_index = [&](const std::string& name, int ln) {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].name == name) return static_cast<int>(i);
    throw SpecError(ErrorCode::UnknownIdentifier, ln, "unknown block '" + name + "'");
  };
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (int a = 0; a < n; ++a) {
      if (!blocks[b].box.periodic[a]) continue;
      Vec shift = Vec::Zero(n);
      shift[a] = -(blocks[b].box.hi[a] - blocks[b].box.lo[a]);
      int bi = static_cast<int>(b);
      at.add_glue({bi, a, 1}, {bi, a, 0}, {0, 1, 2, 3}, {1, 1, 1, 1}, shift);
    }
  for (const auto& gl : glue_lines) {
    const int ln = gl.line;
    auto words = split(gl.text, " \t");
    if (words.size() < 3 || (words[1] != "->" && words[1] != "="))
      throw SpecError(ErrorCode::Syntax, ln, "expected 'A:axis:side -> B:axis:side perm=... flip=... shift=...'");
    auto face = [&](const std::string& f) {
      auto p = split(f, ":");
      if (p.size() != 3 || (p[2] != "+" && p[2] != "-"))
        throw SpecError(ErrorCode::Syntax, ln, "face must look like block:axis:+ or block:axis:-");
      FaceRef r;
      r.block = block_index(p[0], ln);
      double ax = to_number(p[1], ln);
      if (ax < 1 || ax > n || ax != std::floor(ax)) throw SpecError(ErrorCode::BadParams, ln, "face axis out of range");
      r.axis = static_cast<int>(ax) - 1;
      r.side = p[2] == "+" ? 1 : 0;
      return r;
    };
    FaceRef from = face(words[0]), to = face(words[2]);
    std::array<int, 4> perm{0, 1, 2, 3}, flip{1, 1, 1, 1};
    Vec shift = Vec::Zero(n);
    for (std::size_t w = 3; w < words.size(); ++w) {
      auto eq = words[w].find('=');
      if (eq == std::string::npos) throw SpecError(ErrorCode::Syntax, ln, "expected key=value, got '" + words[w] + "'");
      std::string key = words[w].substr(0, eq);
      auto vals = split(words[w].substr(eq + 1), ",");
      if (static_cast<int>(vals.size()) != n)
        throw SpecError(ErrorCode::DimensionMismatch, ln, key + " needs " + std::to_string(n) + " entries");
      for (int i = 0; i < n; ++i) {
        if (key == "perm") {
          double v = to_number(vals[i], ln);
          if (v < 1 || v > n || v != std::floor(v)) throw SpecError(ErrorCode::BadParams, ln, "perm entry out of range");
          perm[i] = static_cast<int>(v) - 1;
        } else if (key == "flip") {
          if (vals[i] != "+" && vals[i] != "-") throw SpecError(ErrorCode::Syntax, ln, "flip entries are + or -");
          flip[i] = vals[i] == "+" ? 1 : -1;
        } else if (key == "shift") {
          shift[i] = to_number(vals[i], ln);
        } else {
          throw SpecError(ErrorCode::Syntax, ln, "unknown glue key '" + key + "'");
        }
      }
    }
    try {
      at.add_glue(from, to, perm, flip, shift);
    } catch (const SpecError&) {
      throw;
    } catch (const Error& err) {
      throw SpecError(err.code(), ln, err.what());
    }
  }
  return at;
}

Atlas load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot read spec file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_spec(ss.str());
}

}  // namespace cn2
