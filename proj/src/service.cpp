#include "fmcq/service.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "fmcq/csp.hpp"
#include "fmcq/diagnosis.hpp"

namespace fmcq {

ReprChoice parse_repr(std::string_view name) {
  if (name == "all" || name == "all-configs") return ReprChoice::kAllConfigs;
  if (name == "per-feature") return ReprChoice::kPerFeature;
  if (name == "per-constraint") return ReprChoice::kPerConstraint;
  if (name == "csp") return ReprChoice::kCsp;
  throw RequestError("unknown representation '" + std::string(name) + "'",
                     {"repr must be one of all, per-feature, per-constraint, csp"});
}

std::string_view to_string(ReprChoice r) {
  switch (r) {
    case ReprChoice::kAllConfigs: return "all-configs";
    case ReprChoice::kPerFeature: return "per-feature";
    case ReprChoice::kPerConstraint: return "per-constraint";
    case ReprChoice::kCsp: return "csp";
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Requirements parse_requirements(std::string_view text) {
  Requirements cr;
  std::vector<std::string> problems;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view atom = trim(text.substr(start, end - start));
    start = end + 1;
    if (atom.empty()) continue;
    const auto eq = atom.find('=');
    const std::string_view value = eq == std::string_view::npos ? "" : trim(atom.substr(eq + 1));
    if (eq == std::string_view::npos || trim(atom.substr(0, eq)).empty() || (value != "0" && value != "1")) {
      problems.push_back("malformed atom '" + std::string(atom) + "' (expected feature=0 or feature=1)");
      continue;
    }
    cr.set(std::string(trim(atom.substr(0, eq))), value == "1" ? 1 : 0);
  }
  if (!problems.empty()) throw RequestError("malformed requirements", std::move(problems));
  return cr;
}

ModelEntry::ModelEntry(std::string id, std::string name, FeatureModel fm)
    : id_(std::move(id)), name_(std::move(name)), cf_(translate(fm)) {}

const AnalysisResult& ModelEntry::analysis() const {
  std::lock_guard lock(mu_);
  if (!analysis_) analysis_ = analyze(cf_);
  return *analysis_;
}

std::shared_ptr<const Representation> ModelEntry::representation(ReprChoice r) const {
  if (r == ReprChoice::kCsp) return nullptr;
  const AnalysisResult& facts = analysis();
  std::lock_guard lock(mu_);
  auto& slot = reprs_[r];
  if (!slot) {
    switch (r) {
      case ReprChoice::kAllConfigs: slot = std::make_shared<Representation>(build_all_configs(cf_)); break;
      case ReprChoice::kPerFeature:
        slot = std::make_shared<Representation>(build_per_feature(cf_, PerFeatureOptions::all(), facts));
        break;
      case ReprChoice::kPerConstraint:
        slot = std::make_shared<Representation>(build_per_constraint(cf_, PerConstraintOptions{true}));
        break;
      case ReprChoice::kCsp: break;
    }
  }
  return slot;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Json base() { return Json{{"api_version", kApiVersion}}; }

Value to_value(const Json& v, const std::string& feature, std::vector<std::string>& problems) {
  if (v.is_number_integer() && (v.get<long long>() == 0 || v.get<long long>() == 1))
    return static_cast<Value>(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  problems.push_back("value for '" + feature + "' must be 0 or 1");
  return 0;
}

// cr accepts {"f": 1}, "f=1,g=0" or ["f=1", ...]. Every bad atom is reported.
Requirements parse_cr(const FeatureModel& fm, const Json& body) {
  if (!body.is_object() || !body.contains("cr") || body["cr"].is_null()) return {};
  const Json& j = body["cr"];
  Requirements cr;
  std::vector<std::string> problems;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      const Value value = to_value(v, k, problems);
      cr.set(k, value);
    }
  } else if (j.is_string() || j.is_array()) {
    std::string text;
    if (j.is_string()) {
      text = j.get<std::string>();
    } else {
      for (const Json& a : j) {
        if (!a.is_string()) {
          problems.push_back("requirement atoms must be strings like \"f=1\"");
          continue;
        }
        text += a.get<std::string>() + ",";
      }
    }
    try {
      cr = parse_requirements(text);
    } catch (const RequestError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  } else {
    problems.push_back("cr must be an object, a string or a list of atoms");
  }
  for (const auto& [id, v] : cr.bindings())
    if (!fm.find(id)) problems.push_back("unknown feature '" + id + "'");
  if (!problems.empty()) throw RequestError("invalid requirements", std::move(problems));
  return cr;
}

ReprChoice repr_of(const Json& body, ReprChoice fallback) {
  if (!body.is_object() || !body.contains("repr")) return fallback;
  if (!body["repr"].is_string()) throw RequestError("repr must be a string");
  return parse_repr(body["repr"].get<std::string>());
}

std::optional<std::uint64_t> natural(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || body[key].is_null()) return std::nullopt;
  const Json& v = body[key];
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw RequestError(std::string(key) + " must be a natural number");
  return body[key].get<std::uint64_t>();
}

Json config_json(const FeatureModel& fm, const Configuration& c) {
  Json out = Json::object();
  for (std::size_t i = 0; i < fm.size(); ++i) out[fm.feature(i).id] = c.values[i];
  return out;
}

Json bindings_json(const FeatureModel& fm, const std::vector<Binding>& bs) {
  Json out = Json::object();
  for (const Binding& b : bs) out[fm.feature(b.feature).id] = b.value;
  return out;
}

Json cr_json(const Requirements& cr) {
  Json out = Json::object();
  for (const auto& [id, v] : cr.bindings()) out[id] = v;
  return out;
}

std::vector<std::string> sorted_ids(const FeatureModel& fm, const std::set<std::string>& ids) {
  std::vector<std::string> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
    return fm.index_of(a) < fm.index_of(b);
  });
  return out;
}

Json tree_json(const FeatureModel& fm, std::size_t i) {
  const Feature& f = fm.feature(i);
  Json node{{"id", f.id}, {"name", f.name}, {"decomposition", std::string(to_string(f.decomposition))}};
  Json children = Json::array();
  Json groups = Json::array();
  std::set<std::size_t> seen;
  for (std::size_t c : fm.children(i)) {
    children.push_back(tree_json(fm, c));
    if (auto g = fm.group_of(c); g && seen.insert(*g).second)
      groups.push_back(
          {{"kind", std::string(to_string(fm.groups()[*g].kind))}, {"members", fm.groups()[*g].members}});
  }
  node["children"] = std::move(children);
  node["groups"] = std::move(groups);
  return node;
}

// One query path per representation choice.
struct Engine {
  const ModelEntry& entry;
  ReprChoice choice;
  std::shared_ptr<const Representation> repr;

  Engine(const ModelEntry& e, ReprChoice c) : entry(e), choice(c), repr(e.representation(c)) {}

  std::optional<Configuration> first(const Requirements& cr) const {
    if (repr) return solve(*repr, ConfigTask{cr, {}, 1});
    return csp_solve(make_csp(entry.constraints(), resolve(entry.model(), cr)));
  }

  std::uint64_t count_of(const Requirements& cr, std::optional<std::uint64_t> cap) const {
    if (repr) return count(*repr, ConfigTask{cr, {}, std::nullopt}, cap);
    return csp_count(make_csp(entry.constraints(), resolve(entry.model(), cr)), cap);
  }

  void each(const Requirements& cr, const std::function<bool(const Configuration&)>& visit) const {
    if (repr)
      enumerate(*repr, ConfigTask{cr, {}, std::nullopt}, visit);
    else
      csp_enumerate(make_csp(entry.constraints(), resolve(entry.model(), cr)), visit);
  }
};

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

std::string Service::add_model(FeatureModel fm, std::string name) {
  require_valid(fm);
  std::lock_guard lock(mu_);
  std::string id = "m" + std::to_string(next_model_++);
  if (name.empty()) name = fm.feature(fm.root_index()).name;
  models_.emplace(id, std::make_shared<const ModelEntry>(id, std::move(name), std::move(fm)));
  return id;
}

std::shared_ptr<const ModelEntry> Service::model(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(id);
  if (it == models_.end()) throw NotFound("unknown model '" + id + "'");
  return it->second;
}

Json Service::handle_upload(const std::string& document, std::optional<ModelFormat> format, std::string name) {
  ModelDocument doc = parse_document(document, format);
  const std::string id = add_model(doc.model, std::move(name));
  auto entry = model(id);
  const AnalysisResult& a = entry->analysis();
  Json out = base();
  out["model_id"] = id;
  out["name"] = entry->name();
  out["format"] = std::string(to_string(doc.format));
  out["stats"] = {{"features", entry->model().size()},
                  {"leaf_features", leaf_features(entry->model()).size()},
                  {"cross_tree_constraints", entry->model().ctcs().size()},
                  {"formulas", entry->constraints().size()},
                  {"configurations", a.configuration_count ? Json(*a.configuration_count) : Json(nullptr)}};
  return out;
}

Json Service::handle_model(const std::string& model_id) const {
  auto entry = model(model_id);
  const FeatureModel& fm = entry->model();
  Json out = base();
  out["model_id"] = model_id;
  out["name"] = entry->name();
  Json features = Json::array();
  for (const Feature& f : fm.features())
    features.push_back({{"id", f.id},
                        {"name", f.name},
                        {"parent", f.parent ? Json(*f.parent) : Json(nullptr)},
                        {"decomposition", std::string(to_string(f.decomposition))}});
  out["features"] = std::move(features);
  out["tree"] = tree_json(fm, fm.root_index());
  Json ctcs = Json::array();
  for (const CrossTreeConstraint& c : fm.ctcs())
    ctcs.push_back({{"kind", std::string(to_string(c.kind))}, {"lhs", c.lhs}, {"rhs", c.rhs}});
  out["constraints"] = std::move(ctcs);
  Json formulas = Json::array();
  for (const Formula& f : entry->constraints().formulas()) formulas.push_back(render(f, fm));
  out["formulas"] = std::move(formulas);
  return out;
}

Json Service::handle_solve(const std::string& model_id, const Json& body) const {
  auto entry = model(model_id);
  const FeatureModel& fm = entry->model();
  const Requirements cr = parse_cr(fm, body);
  const ReprChoice choice = repr_of(body, ReprChoice::kPerFeature);
  const std::uint64_t limit = natural(body, "limit").value_or(1);
  std::vector<std::string> projection;
  if (body.is_object() && body.contains("projection") && !body["projection"].is_null()) {
    std::vector<std::string> problems;
    for (const Json& p : body["projection"]) {
      if (!p.is_string() || !fm.find(p.get<std::string>()))
        problems.push_back("unknown projection feature " + p.dump());
      else
        projection.push_back(p.get<std::string>());
    }
    if (!problems.empty()) throw RequestError("invalid projection", std::move(problems));
  }

  const auto build_start = Clock::now();
  const Engine engine(*entry, choice);
  const double build_ms = ms_since(build_start);

  const auto query_start = Clock::now();
  Json configs = Json::array();
  std::vector<std::size_t> cols;
  for (const std::string& p : projection) cols.push_back(fm.index_of(p));
  std::set<std::vector<Value>> seen;
  if (limit > 0) {
    engine.each(cr, [&](const Configuration& c) {
      if (cols.empty()) {
        configs.push_back(config_json(fm, c));
      } else {
        std::vector<Value> key;
        Json row = Json::object();
        for (std::size_t k : cols) {
          key.push_back(c.values[k]);
          row[fm.feature(k).id] = c.values[k];
        }
        if (seen.insert(key).second) configs.push_back(std::move(row));
      }
      return configs.size() < limit;
    });
  }
  const bool sat = !configs.empty() || (limit == 0 && engine.first(cr).has_value());
  Json out = base();
  out["verdict"] = sat ? "SAT" : "UNSAT";
  out["repr"] = std::string(to_string(choice));
  out["configurations"] = std::move(configs);
  if (body.is_object() && body.value("count", false)) out["count"] = engine.count_of(cr, std::nullopt);
  out["timing"] = {{"build_ms", build_ms}, {"query_ms", ms_since(query_start)}};
  return out;
}

Json Service::handle_count(const std::string& model_id, const Json& body) const {
  auto entry = model(model_id);
  const Requirements cr = parse_cr(entry->model(), body);
  const ReprChoice choice = repr_of(body, ReprChoice::kPerFeature);
  const auto build_start = Clock::now();
  const Engine engine(*entry, choice);
  const double build_ms = ms_since(build_start);
  const auto query_start = Clock::now();
  Json out = base();
  out["repr"] = std::string(to_string(choice));
  out["count"] = engine.count_of(cr, std::nullopt);
  out["timing"] = {{"build_ms", build_ms}, {"query_ms", ms_since(query_start)}};
  return out;
}

namespace {

Json diagnoses_json(const FeatureModel& fm, const std::vector<Diagnosis>& ds) {
  Json out = Json::array();
  for (const Diagnosis& d : ds)
    out.push_back({{"delta", bindings_json(fm, d.delta)},
                   {"suggested", bindings_json(fm, d.suggested)},
                   {"witness", config_json(fm, d.witness)}});
  return out;
}

DiagnosisReport run_diagnosis(const ModelEntry& entry, const Requirements& cr, std::size_t max) {
  DiagnoseOptions opts;
  opts.max_results = max;
  std::shared_ptr<const Representation> table;
  if (entry.model().size() <= opts.all_configs_limit) {
    table = entry.representation(ReprChoice::kAllConfigs);
    opts.all_configs = table.get();
  }
  return diagnose_model(entry.constraints(), cr, opts);
}

}  // namespace

Json Service::handle_diagnose(const std::string& model_id, const Json& body) const {
  auto entry = model(model_id);
  const Requirements cr = parse_cr(entry->model(), body);
  const std::size_t max = natural(body, "max").value_or(options_.max_diagnoses);
  const DiagnosisReport report = run_diagnosis(*entry, cr, max);
  Json out = base();
  out["consistent"] = !report.diagnoses.empty() && report.diagnoses.front().delta.empty();
  out["diagnoses"] = diagnoses_json(entry->model(), report.diagnoses);
  out["scanned"] = report.scanned;
  out["complete"] = report.complete;
  out["source"] = report.source;
  return out;
}

Json Service::handle_analysis(const std::string& model_id) const {
  auto entry = model(model_id);
  const AnalysisResult& a = entry->analysis();
  const FeatureModel& fm = entry->model();
  Json out = base();
  out["void"] = a.void_model;
  out["dead"] = sorted_ids(fm, a.dead);
  out["false_optional"] = sorted_ids(fm, a.false_optional);
  out["core"] = sorted_ids(fm, a.core);
  out["configuration_count"] = a.configuration_count ? Json(*a.configuration_count) : Json(nullptr);
  return out;
}

Json Service::evaluate_state(const ModelEntry& entry, ReprChoice repr, const Requirements& cr) const {
  const FeatureModel& fm = entry.model();
  const std::vector<Binding> bound = resolve(fm, cr);
  const Engine engine(entry, repr);
  const std::optional<Configuration> conf = engine.first(cr);

  Json out = base();
  out["cr"] = cr_json(cr);
  out["consistent"] = conf.has_value();
  Json forced = Json::object();
  Json diagnoses = Json::array();
  std::uint64_t remaining = 0;
  bool exact = true;
  if (conf) {
    // A feature is forced when flipping its value in the found configuration is unsatisfiable.
    for (std::size_t i = 0; i < fm.size(); ++i) {
      const std::string& id = fm.feature(i).id;
      if (cr.get(id)) continue;
      Requirements probe = cr;
      probe.set(id, conf->values[i] ? 0 : 1);
      if (!engine.first(probe)) forced[id] = conf->values[i];
    }
    remaining = engine.count_of(cr, options_.count_cap);
    exact = remaining < options_.count_cap;
  } else {
    diagnoses = diagnoses_json(fm, run_diagnosis(entry, cr, options_.max_diagnoses).diagnoses);
  }
  out["forced"] = std::move(forced);
  out["count"] = remaining;
  out["count_exact"] = exact;
  out["diagnoses"] = std::move(diagnoses);
  return out;
}

std::size_t Service::expire_idle() {
  const auto now = options_.clock();
  std::lock_guard lock(mu_);
  return std::erase_if(sessions_, [&](const auto& kv) {
    std::lock_guard s(kv.second->mu);
    return now - kv.second->last_used > options_.session_ttl;
  });
}

std::size_t Service::session_count() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) {
  expire_idle();
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

Json Service::handle_create_session(const Json& body) {
  if (!body.is_object() || !body.contains("model_id") || !body["model_id"].is_string())
    throw RequestError("model_id is required");
  expire_idle();
  auto entry = model(body["model_id"].get<std::string>());
  auto s = std::make_shared<Session>();
  s->entry = entry;
  s->repr = repr_of(body, ReprChoice::kPerFeature);
  s->cr = parse_cr(entry->model(), body);
  s->last_used = options_.clock();
  Json state = evaluate_state(*entry, s->repr, s->cr);
  s->consistent = state["consistent"].get<bool>();
  {
    std::lock_guard lock(mu_);
    s->id = "s" + std::to_string(next_session_++);
    sessions_.emplace(s->id, s);
  }
  state["session_id"] = s->id;
  state["model_id"] = entry->id();
  state["repr"] = std::string(to_string(s->repr));
  state["seq"] = 0;
  return state;
}

Json Service::handle_step(const std::string& session_id, const Json& body) {
  auto s = session(session_id);
  std::lock_guard lock(s->mu);
  const FeatureModel& fm = s->entry->model();
  if (!body.is_object() || (body.contains("set") == body.contains("unset")))
    throw RequestError("step needs exactly one of 'set' or 'unset'");

  Requirements next = s->cr;
  std::vector<std::string> problems;
  if (body.contains("set")) {
    const Json& set = body["set"];
    if (!set.is_object() || set.empty()) throw RequestError("set must be an object like {\"t\": 1}");
    for (const auto& [id, v] : set.items()) {
      if (!fm.find(id)) throw NotFound("unknown feature '" + id + "'");
      next.set(id, to_value(v, id, problems));
    }
  } else {
    const Json& unset = body["unset"];
    std::vector<std::string> ids;
    if (unset.is_string())
      ids.push_back(unset.get<std::string>());
    else if (unset.is_array())
      for (const Json& u : unset) ids.push_back(u.is_string() ? u.get<std::string>() : u.dump());
    else
      throw RequestError("unset must be a feature id or a list of ids");
    for (const std::string& id : ids) {
      if (!fm.find(id)) throw NotFound("unknown feature '" + id + "'");
      next.unset(id);
    }
  }
  if (!problems.empty()) throw RequestError("invalid step", std::move(problems));

  const bool changed = !(next == s->cr);
  Json state = evaluate_state(*s->entry, s->repr, next);
  s->cr = std::move(next);
  s->consistent = state["consistent"].get<bool>();
  s->last_used = options_.clock();
  state["session_id"] = s->id;
  state["seq"] = ++s->seq;
  state["changed"] = changed;
  return state;
}

Json Service::handle_session(const std::string& session_id) {
  auto s = session(session_id);
  std::lock_guard lock(s->mu);
  s->last_used = options_.clock();
  Json state = evaluate_state(*s->entry, s->repr, s->cr);
  state["session_id"] = s->id;
  state["model_id"] = s->entry->id();
  state["repr"] = std::string(to_string(s->repr));
  state["seq"] = s->seq;
  return state;
}

std::pair<int, Json> error_response(const std::exception& e) {
  Json err{{"message", e.what()}};
  int status = 500;
  std::string kind = "internal";
  if (const auto* r = dynamic_cast<const RequestError*>(&e)) {
    status = 400;
    kind = "validation";
    err["problems"] = r->problems();
  } else if (dynamic_cast<const NotFound*>(&e)) {
    status = 404;
    kind = "not_found";
  } else if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    status = 400;
    kind = "parse";
    err["line"] = p->line();
    err["column"] = p->column();
  } else if (dynamic_cast<const UnsupportedConstruct*>(&e)) {
    status = 422;
    kind = "unsupported";
  } else if (dynamic_cast<const CapacityError*>(&e)) {
    status = 422;
    kind = "capacity";
  } else if (dynamic_cast<const ModelError*>(&e)) {
    status = 400;
    kind = "model";
  } else if (dynamic_cast<const nlohmann::json::exception*>(&e)) {
    status = 400;
    kind = "json";
  } else if (dynamic_cast<const Error*>(&e)) {
    status = 400;
    kind = "error";
  }
  err["kind"] = kind;
  Json body = base();
  body["error"] = std::move(err);
  return {status, body};
}

}  // namespace fmcq
