#include "fmcq/io.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fmcq/error.hpp"

namespace fmcq {

std::string_view to_string(ModelFormat f) { return f == ModelFormat::kSxfm ? "sxfm" : "native"; }

ModelFormat parse_format(std::string_view name) {
  if (name == "sxfm") return ModelFormat::kSxfm;
  if (name == "native") return ModelFormat::kNative;
  throw Error("unknown model format '" + std::string(name) + "' (expected sxfm or native)");
}

namespace {

struct Line {
  std::size_t number = 0;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t start = 0, number = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back({number++, line});
    start = end + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t leading_ws(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && (s[n] == ' ' || s[n] == '\t')) ++n;
  return n;
}

std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (auto [ent, c] : kEntities) {
        if (s.substr(i, ent.size()) == ent) {
          out.push_back(c);
          i += ent.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

// ---------------------------------------------------------------- SXFM

struct SxfmNode {
  char kind = 0;  // 'r', 'm', 'o', 'g', ' ' (group member)
  std::string name;
  std::string sxfm_id;
  std::string lo, hi;
  std::size_t line = 0;
  std::size_t indent = 0;
  int parent = -1;
  std::vector<int> children;
};

SxfmNode parse_sxfm_line(const Line& l, std::size_t indent) {
  std::string_view s = trim(l.text);
  const std::size_t col = indent + 1;
  if (s.size() < 2 || s[0] != ':') throw ParseError("expected a feature line starting with ':'", l.number, col);
  SxfmNode node;
  node.line = l.number;
  node.indent = indent;
  std::string_view rest;
  if (s[1] == ' ' || s[1] == '\t') {
    node.kind = ' ';
    rest = s.substr(1);
  } else {
    node.kind = s[1];
    if (node.kind != 'r' && node.kind != 'm' && node.kind != 'o' && node.kind != 'g')
      throw ParseError(std::string("unknown feature marker ':") + s[1] + "'", l.number, col);
    rest = s.substr(2);
  }
  rest = trim(rest);

  if (node.kind == 'g') {
    const auto open = rest.find('[');
    const auto close = rest.find(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      throw ParseError("group without cardinality", l.number, col);
    std::string_view card = rest.substr(open + 1, close - open - 1);
    const auto comma = card.find(',');
    if (comma == std::string_view::npos) throw ParseError("malformed group cardinality", l.number, col + 2 + open);
    node.lo = trim(card.substr(0, comma));
    node.hi = trim(card.substr(comma + 1));
    std::string_view id = trim(rest.substr(0, open));
    if (id.size() >= 2 && id.front() == '(' && id.back() == ')') node.sxfm_id = id.substr(1, id.size() - 2);
    return node;
  }

  if (!rest.empty() && rest.back() == ')') {
    const auto open = rest.rfind('(');
    if (open == std::string_view::npos) throw ParseError("unbalanced ')' in feature line", l.number, col);
    node.sxfm_id = trim(rest.substr(open + 1, rest.size() - open - 2));
    node.name = decode_entities(trim(rest.substr(0, open)));
  } else {
    node.name = decode_entities(rest);
  }
  if (node.name.empty()) node.name = node.sxfm_id;
  if (node.name.empty()) throw ParseError("feature without a name", l.number, col);
  if (node.sxfm_id.empty()) node.sxfm_id = node.name;
  return node;
}

std::optional<std::pair<std::size_t, std::size_t>> find_section(const std::vector<Line>& lines, std::string_view tag,
                                                                bool required) {
  const std::string open = "<" + std::string(tag);
  const std::string close = "</" + std::string(tag) + ">";
  std::optional<std::size_t> begin;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view t = trim(lines[i].text);
    if (!begin && t.starts_with(open)) {
      if (t.find('>') == std::string_view::npos)
        throw ParseError("unterminated tag <" + std::string(tag), lines[i].number, leading_ws(lines[i].text) + 1);
      begin = i;
    } else if (begin && t.starts_with(close)) {
      return std::pair{*begin + 1, i};
    }
  }
  if (begin)
    throw ParseError("missing " + close, lines.back().number, 1);
  if (required) throw ParseError("missing <" + std::string(tag) + "> section", 1, 1);
  return std::nullopt;
}

}  // namespace

FeatureModel parse_sxfm(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  if (trim(text).empty() || trim(text).front() != '<') throw ParseError("expected markup", 1, 1);
  const auto tree = find_section(lines, "feature_tree", true);

  std::vector<SxfmNode> nodes;
  std::vector<int> stack;
  for (std::size_t i = tree->first; i < tree->second; ++i) {
    const Line& l = lines[i];
    if (trim(l.text).empty()) continue;
    const std::size_t indent = leading_ws(l.text);
    SxfmNode node = parse_sxfm_line(l, indent);
    while (!stack.empty() && nodes[stack.back()].indent >= indent) stack.pop_back();
    if (node.kind == 'r') {
      if (!nodes.empty()) throw ParseError("root feature must come first and appear once", l.number, indent + 1);
    } else {
      if (stack.empty()) throw ParseError("feature outside the root", l.number, indent + 1);
      node.parent = stack.back();
      const char pk = nodes[node.parent].kind;
      if ((node.kind == ' ') != (pk == 'g'))
        throw ParseError(node.kind == ' ' ? "group member outside a group" : "group may only contain ': ' members",
                         l.number, indent + 1);
      nodes[node.parent].children.push_back(static_cast<int>(nodes.size()));
    }
    stack.push_back(static_cast<int>(nodes.size()));
    nodes.push_back(std::move(node));
  }
  if (nodes.empty()) throw ParseError("empty feature tree", lines[tree->first - 1].number, 1);

  // Display names and ids; clashes get the SXFM id appended.
  std::unordered_map<std::string, std::string> id_of_sxfm;
  std::unordered_set<std::string> used_ids;
  std::vector<std::string> names(nodes.size()), ids(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == 'g') continue;
    std::string name = nodes[i].name;
    if (used_ids.contains(slugify(name))) name += " (" + nodes[i].sxfm_id + ")";
    if (used_ids.contains(slugify(name)))
      throw ParseError("duplicate feature id '" + nodes[i].sxfm_id + "'", nodes[i].line, nodes[i].indent + 1);
    names[i] = name;
    ids[i] = slugify(name);
    used_ids.insert(ids[i]);
    if (!id_of_sxfm.emplace(nodes[i].sxfm_id, ids[i]).second)
      throw ParseError("duplicate feature id '" + nodes[i].sxfm_id + "'", nodes[i].line, nodes[i].indent + 1);
  }

  std::vector<Feature> features;
  std::vector<Group> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const SxfmNode& n = nodes[i];
    if (n.kind == 'g') {
      const std::size_t k = n.children.size();
      if (k == 0) throw ParseError("empty group", n.line, n.indent + 1);
      const bool alternative = n.lo == "1" && n.hi == "1";
      bool or_group = n.lo == "1" && n.hi == "*";
      if (!alternative && !or_group && n.lo == "1") {
        try {
          or_group = std::stoul(n.hi) >= k;
        } catch (const std::exception&) {
          or_group = false;
        }
      }
      if (!alternative && !or_group)
        throw UnsupportedConstruct("group cardinality [" + n.lo + "," + n.hi + "] at line " + std::to_string(n.line));
      if (k == 1) continue;
      Group g{ids[n.parent], alternative ? GroupKind::kAlternative : GroupKind::kOr, {}};
      for (int c : n.children) g.members.push_back(ids[c]);
      groups.push_back(std::move(g));
      continue;
    }
    Feature f;
    f.id = ids[i];
    f.name = names[i];
    switch (n.kind) {
      case 'r': f.decomposition = Decomposition::kRoot; break;
      case 'm': f.decomposition = Decomposition::kMandatory; break;
      case 'o': f.decomposition = Decomposition::kOptional; break;
      default:
        f.decomposition =
            nodes[n.parent].children.size() == 1 ? Decomposition::kMandatory : Decomposition::kGroupMember;
    }
    if (n.parent >= 0) {
      const int p = nodes[n.parent].kind == 'g' ? nodes[n.parent].parent : n.parent;
      f.parent = ids[p];
    }
    features.push_back(std::move(f));
  }

  std::vector<CrossTreeConstraint> ctcs;
  if (const auto cons = find_section(lines, "constraints", false)) {
    for (std::size_t i = cons->first; i < cons->second; ++i) {
      const Line& l = lines[i];
      std::string_view s = trim(l.text);
      if (s.empty()) continue;
      const std::size_t col = leading_ws(l.text) + 1;
      const auto colon = s.find(':');
      if (colon == std::string_view::npos) throw ParseError("constraint without a label", l.number, col);
      std::string_view clause = trim(s.substr(colon + 1));
      std::vector<std::pair<bool, std::string>> lits;
      std::istringstream in{std::string(clause)};
      std::string tok;
      bool expect_lit = true;
      while (in >> tok) {
        if (!expect_lit) {
          if (tok != "or") throw UnsupportedConstruct("clause '" + std::string(clause) + "' at line " +
                                                      std::to_string(l.number));
          expect_lit = true;
          continue;
        }
        const bool neg = tok.front() == '~';
        std::string id = neg ? tok.substr(1) : tok;
        auto it = id_of_sxfm.find(id);
        if (it == id_of_sxfm.end())
          throw ParseError("unknown feature '" + id + "' in constraint", l.number,
                           col + s.find(tok, colon));
        lits.emplace_back(neg, it->second);
        expect_lit = false;
      }
      if (lits.size() != 2 || expect_lit || (!lits[0].first && !lits[1].first))
        throw UnsupportedConstruct("clause '" + std::string(clause) + "' at line " + std::to_string(l.number));
      if (lits[0].first && lits[1].first)
        ctcs.push_back({CtcKind::kExcludes, lits[0].second, lits[1].second});
      else if (lits[0].first)
        ctcs.push_back({CtcKind::kRequires, lits[0].second, lits[1].second});
      else
        ctcs.push_back({CtcKind::kRequires, lits[1].second, lits[0].second});
    }
  }

  FeatureModel fm(std::move(features), std::move(groups), std::move(ctcs));
  require_valid(fm);
  return fm;
}

// ---------------------------------------------------------------- native

namespace {

bool needs_quotes(std::string_view name) {
  if (name.empty()) return true;
  for (char c : name)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '#' || c == '\\') return true;
  return false;
}

std::string quote(std::string_view name) {
  if (!needs_quotes(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Token {
  std::string text;
  std::size_t column;
};

// Splits a line into tokens, honouring double quotes and stripping comments.
std::vector<Token> tokenize(const Line& l) {
  std::vector<Token> out;
  std::string_view s = l.text;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    if (s[i] == '#') break;
    Token t{{}, i + 1};
    if (s[i] == '"') {
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          t.text.push_back(s[i + 1]);
          i += 2;
        } else if (s[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          t.text.push_back(s[i++]);
        }
      }
      if (!closed) throw ParseError("unterminated quoted name", l.number, t.column);
    } else {
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '#') t.text.push_back(s[i++]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

FeatureModel parse_native(std::string_view text) {
  struct Frame {
    std::size_t level;
    std::string feature_id;  // empty for group frames
    int group = -1;
  };
  std::vector<Feature> features;
  std::vector<Group> groups;
  std::vector<CrossTreeConstraint> ctcs;
  std::unordered_map<std::string, std::size_t> by_name;
  std::unordered_map<std::string, std::string> id_of_name;
  std::unordered_set<std::string> ids;
  std::vector<Frame> stack;
  bool in_constraints = false;
  bool seen_root = false;

  for (const Line& l : split_lines(text)) {
    std::vector<Token> toks = tokenize(l);
    if (toks.empty()) continue;
    const std::size_t ws = leading_ws(l.text);
    if (l.text.substr(0, ws).find('\t') != std::string_view::npos)
      throw ParseError("tabs are not allowed in indentation", l.number, 1);
    if (ws % 2) throw ParseError("indentation must be a multiple of 2 spaces", l.number, ws + 1);
    const std::size_t level = ws / 2;
    const std::string& kw = toks[0].text;

    if (kw == "constraints") {
      if (level != 0 || toks.size() != 1) throw ParseError("malformed constraints header", l.number, toks[0].column);
      in_constraints = true;
      continue;
    }
    if (in_constraints) {
      if (level != 1) throw ParseError("constraints must be indented by one level", l.number, ws + 1);
      if (kw != "requires" && kw != "excludes")
        throw ParseError("expected 'requires' or 'excludes'", l.number, toks[0].column);
      if (toks.size() != 3) throw ParseError("constraint needs exactly two features", l.number, toks[0].column);
      std::string operands[2];
      for (int k = 0; k < 2; ++k) {
        auto it = id_of_name.find(toks[k + 1].text);
        if (it == id_of_name.end())
          throw ParseError("unknown feature '" + toks[k + 1].text + "'", l.number, toks[k + 1].column);
        operands[k] = it->second;
      }
      ctcs.push_back({kw == "requires" ? CtcKind::kRequires : CtcKind::kExcludes, operands[0], operands[1]});
      continue;
    }

    while (!stack.empty() && stack.back().level >= level) stack.pop_back();
    if (!stack.empty() && stack.back().level + 1 != level)
      throw ParseError("feature under unknown parent (indentation skips a level)", l.number, ws + 1);
    if (stack.empty() && level != 0)
      throw ParseError("feature under unknown parent", l.number, ws + 1);

    if (kw == "group") {
      if (toks.size() != 2 || (toks[1].text != "alternative" && toks[1].text != "or"))
        throw ParseError("expected 'group alternative' or 'group or'", l.number, toks[0].column);
      if (stack.empty() || stack.back().feature_id.empty())
        throw ParseError("group must be nested under a feature", l.number, ws + 1);
      groups.push_back(
          {stack.back().feature_id, toks[1].text == "alternative" ? GroupKind::kAlternative : GroupKind::kOr, {}});
      stack.push_back({level, "", static_cast<int>(groups.size() - 1)});
      continue;
    }
    if (kw != "feature") throw ParseError("unknown keyword '" + kw + "'", l.number, toks[0].column);
    if (toks.size() < 2) throw ParseError("feature without a name", l.number, toks[0].column);

    Feature f;
    f.name = toks[1].text;
    const bool in_group = !stack.empty() && stack.back().group >= 0;
    if (in_group) {
      if (toks.size() != 2) throw ParseError("group members take no decomposition", l.number, toks[2].column);
      f.decomposition = Decomposition::kGroupMember;
    } else {
      if (toks.size() != 3) throw ParseError("expected root, mandatory or optional", l.number, toks[1].column);
      const std::string& d = toks[2].text;
      if (d == "root")
        f.decomposition = Decomposition::kRoot;
      else if (d == "mandatory")
        f.decomposition = Decomposition::kMandatory;
      else if (d == "optional")
        f.decomposition = Decomposition::kOptional;
      else
        throw ParseError("expected root, mandatory or optional", l.number, toks[2].column);
      if ((f.decomposition == Decomposition::kRoot) != (level == 0))
        throw ParseError(level == 0 ? "top-level feature must be the root" : "nested feature marked root", l.number,
                         toks[2].column);
    }
    if (level == 0 && seen_root) throw ParseError("multiple roots", l.number, ws + 1);
    if (level == 0) seen_root = true;
    if (by_name.contains(f.name)) throw ParseError("duplicate name '" + f.name + "'", l.number, toks[1].column);
    f.id = slugify(f.name);
    if (!ids.insert(f.id).second)
      throw ParseError("name '" + f.name + "' clashes with another feature id '" + f.id + "'", l.number,
                       toks[1].column);
    if (in_group) {
      const Frame& g = stack.back();
      f.parent = groups[g.group].parent;
      groups[g.group].members.push_back(f.id);
    } else if (!stack.empty()) {
      f.parent = stack.back().feature_id;
    }
    by_name.emplace(f.name, features.size());
    id_of_name.emplace(f.name, f.id);
    stack.push_back({level, f.id, -1});
    features.push_back(std::move(f));
  }

  if (features.empty()) throw ParseError("no features declared", 1, 1);
  FeatureModel fm(std::move(features), std::move(groups), std::move(ctcs));
  require_valid(fm);
  return fm;
}

std::string serialize_native(const FeatureModel& fm) {
  require_valid(fm);
  std::ostringstream out;
  auto indent = [&](std::size_t level) { out << std::string(2 * level, ' '); };
  std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t i, std::size_t level) {
    const Feature& f = fm.feature(i);
    indent(level);
    out << "feature " << quote(f.name);
    if (f.decomposition != Decomposition::kGroupMember) out << ' ' << to_string(f.decomposition);
    out << '\n';
    std::set<std::size_t> emitted_groups;
    for (std::size_t c : fm.children(i)) {
      const auto g = fm.group_of(c);
      if (!g) {
        emit(c, level + 1);
        continue;
      }
      if (!emitted_groups.insert(*g).second) continue;
      indent(level + 1);
      out << "group " << to_string(fm.groups()[*g].kind) << '\n';
      for (const std::string& m : fm.groups()[*g].members) emit(fm.index_of(m), level + 2);
    }
  };
  emit(fm.root_index(), 0);
  if (!fm.ctcs().empty()) {
    out << "constraints\n";
    for (const CrossTreeConstraint& c : fm.ctcs())
      out << "  " << to_string(c.kind) << ' ' << quote(fm.feature(fm.index_of(c.lhs)).name) << ' '
          << quote(fm.feature(fm.index_of(c.rhs)).name) << '\n';
  }
  return out.str();
}

ModelFormat detect_format(std::string_view text) {
  text = trim(text);
  return !text.empty() && text.front() == '<' ? ModelFormat::kSxfm : ModelFormat::kNative;
}

ModelDocument parse_document(std::string text, std::optional<ModelFormat> format) {
  ModelDocument doc;
  doc.format = format.value_or(detect_format(text));
  doc.model = doc.format == ModelFormat::kSxfm ? parse_sxfm(text) : parse_native(text);
  doc.source = std::move(text);
  return doc;
}

ModelDocument load_model(const std::filesystem::path& path, std::optional<ModelFormat> format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), format);
}

}  // namespace fmcq
