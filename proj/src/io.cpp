#include "plotsmith/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "plotsmith/csv.hpp"
#include "plotsmith/error.hpp"
#include "plotsmith/factors.hpp"

namespace plotsmith {

using nlohmann::json;

const Intervention* ModelDocument::find_intervention(std::string_view name) const {
  for (const auto& d : interventions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const AdversaryProfile* ModelDocument::find_profile(std::string_view name) const {
  for (const auto& p : profiles) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string key(const std::string& path, const std::string& k) { return path.empty() ? k : path + "." + k; }

const char* type_name(const json& j) {
  switch (j.type()) {
  case json::value_t::null: return "null";
  case json::value_t::boolean: return "boolean";
  case json::value_t::string: return "string";
  case json::value_t::array: return "array";
  case json::value_t::object: return "object";
  default: return "number";
  }
}

// Schema reader: every accessor reports problems with the element's path and
// returns a neutral value so that reading can continue and collect them all.
class Reader {
public:
  std::vector<Issue> errors;

  void error(std::string code, std::string path, std::string message) {
    errors.push_back({std::move(code), std::move(path), std::move(message)});
  }

  void wrong_type(const json& j, const std::string& path, const char* expected) {
    error("wrong_type", path, std::string("expected ") + expected + ", found " + type_name(j));
  }

  // Checks an object's keys; returns false if `j` is not an object.
  bool object(const json& j, const std::string& path, std::initializer_list<const char*> required,
              std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) {
      wrong_type(j, path.empty() ? "$" : path, "object");
      return false;
    }
    std::set<std::string> known;
    for (const char* k : required) {
      known.insert(k);
      if (!j.contains(k)) error("missing_key", key(path, k), "required key is missing");
    }
    for (const char* k : optional) known.insert(k);
    for (const auto& [k, v] : j.items()) {
      if (!known.contains(k)) error("unknown_key", key(path, k), "unknown key");
    }
    return true;
  }

  const json* child(const json& j, const char* k) const {
    if (!j.is_object()) return nullptr;
    auto it = j.find(k);
    return it == j.end() ? nullptr : &*it;
  }

  double number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      wrong_type(j, path, "number");
      return 0.0;
    }
    return j.get<double>();
  }

  int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
      if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::floor(v) == v && std::abs(v) < 1e9) return static_cast<int>(v);
      }
      wrong_type(j, path, "integer");
      return 0;
    }
    return j.get<int>();
  }

  std::string string(const json& j, const std::string& path) {
    if (!j.is_string()) {
      wrong_type(j, path, "string");
      return {};
    }
    return j.get<std::string>();
  }

  template <class F>
  auto list(const json& j, const std::string& path, F&& item) {
    std::vector<decltype(item(j, path))> out;
    if (!j.is_array()) {
      wrong_type(j, path, "array");
      return out;
    }
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], at(path, i)));
    return out;
  }

  std::vector<double> numbers(const json& j, const std::string& path) {
    return list(j, path, [&](const json& v, const std::string& p) { return number(v, p); });
  }
  std::vector<std::string> strings(const json& j, const std::string& path) {
    return list(j, path, [&](const json& v, const std::string& p) { return string(v, p); });
  }
  // 1-based indices in the document, `shift` subtracted on the way in.
  std::vector<int> indices(const json& j, const std::string& path, int shift) {
    return list(j, path, [&](const json& v, const std::string& p) { return integer(v, p) - shift; });
  }
  std::vector<std::vector<int>> index_lists(const json& j, const std::string& path, int shift) {
    return list(j, path, [&](const json& v, const std::string& p) { return indices(v, p, shift); });
  }

  // Plain value or {"value": v, "overrides": [...]}.
  template <class T, class F>
  Timed<T> timed(const json& j, const std::string& path, F&& plain) {
    if (!(j.is_object() && j.contains("value"))) return Timed<T>(plain(j, path));
    object(j, path, {"value"}, {"overrides"});
    Timed<T> out(plain(j["value"], key(path, "value")));
    if (const json* ov = child(j, "overrides")) {
      const auto p = key(path, "overrides");
      if (!ov->is_array()) {
        wrong_type(*ov, p, "array");
        return out;
      }
      for (std::size_t i = 0; i < ov->size(); ++i) {
        const auto& o = (*ov)[i];
        const auto op = at(p, i);
        if (!object(o, op, {"from", "value"}, {"to"})) continue;
        const int from = o.contains("from") ? integer(o["from"], key(op, "from")) : 1;
        const int to = o.contains("to") ? integer(o["to"], key(op, "to")) : kForever;
        if (from < 1 || to < from) {
          error("bad_time_window", op, "override window must satisfy 1 <= from <= to");
          continue;
        }
        if (o.contains("value")) out = out.with_override(from, to, plain(o["value"], key(op, "value")));
      }
    }
    return out;
  }
};

struct DocReader {
  Reader r;
  ModelDocument doc;

  EmissionTable emission(const json& j, const std::string& path, EmissionFamily family) {
    EmissionTable t;
    if (family == EmissionFamily::Categorical) {
      t.categorical = r.list(j, path, [&](const json& row, const std::string& p) { return r.numbers(row, p); });
    } else if (r.object(j, path, {"mean", "variance"})) {
      if (const json* m = r.child(j, "mean")) t.mean = r.numbers(*m, key(path, "mean"));
      if (const json* v = r.child(j, "variance")) t.variance = r.numbers(*v, key(path, "variance"));
    }
    return t;
  }

  void meta(const json& j) {
    if (!r.object(j, "meta", {"name", "horizon"}, {"version", "time_step", "time_labels"})) return;
    if (const json* v = r.child(j, "name")) doc.model.name = r.string(*v, "meta.name");
    if (const json* v = r.child(j, "horizon")) doc.model.horizon = r.integer(*v, "meta.horizon");
    if (const json* v = r.child(j, "version")) doc.version = r.integer(*v, "meta.version");
    if (const json* v = r.child(j, "time_step")) doc.time_step = r.string(*v, "meta.time_step");
    if (const json* v = r.child(j, "time_labels")) doc.model.time_labels = r.strings(*v, "meta.time_labels");
  }

  void phases(const json& j) {
    if (!r.object(j, "phases", {"labels", "edges", "stages", "initial"}, {"inactive_label"})) return;
    auto& g = doc.model.phases;
    if (const json* v = r.child(j, "inactive_label")) g.inactive_label = r.string(*v, "phases.inactive_label");
    if (const json* v = r.child(j, "labels")) g.labels = r.strings(*v, "phases.labels");
    g.m = static_cast<int>(g.labels.size());
    if (const json* v = r.child(j, "edges")) g.edges = r.index_lists(*v, "phases.edges", 0);
    if (const json* v = r.child(j, "stages")) g.stages = r.indices(*v, "phases.stages", 1);
    if (const json* v = r.child(j, "initial")) doc.model.factors.phase.initial = r.numbers(*v, "phases.initial");
  }

  void tasks(const json& j) {
    if (!r.object(j, "tasks", {"labels", "task_sets"},
                  {"contemporaneous_parents", "cross_slice_parents", "intensity_parents"})) {
      return;
    }
    auto& g = doc.model.tasks;
    if (const json* v = r.child(j, "labels")) g.labels = r.strings(*v, "tasks.labels");
    g.n = static_cast<int>(g.labels.size());
    const auto empty = std::vector<std::vector<int>>(static_cast<std::size_t>(g.n));
    auto parents = [&](const char* k) {
      const json* v = r.child(j, k);
      return v ? r.index_lists(*v, std::string("tasks.") + k, 1) : empty;
    };
    g.contemporaneous_parents = parents("contemporaneous_parents");
    g.cross_slice_parents = parents("cross_slice_parents");
    g.intensity_parents = parents("intensity_parents");
    if (const json* v = r.child(j, "task_sets")) doc.model.bipartite.task_sets = r.index_lists(*v, "tasks.task_sets", 1);
  }

  void factors(const json& j) {
    if (!r.object(j, "factors", {"phase", "task", "intensity"})) return;
    auto& f = doc.model.factors;
    if (const json* ph = r.child(j, "phase"); ph && r.object(*ph, "factors.phase", {"move_prob", "abort_prob", "florets"})) {
      auto scalars = [&](const char* k) {
        std::vector<Timed<double>> out;
        if (const json* v = r.child(*ph, k)) {
          out = r.list(*v, std::string("factors.phase.") + k, [&](const json& x, const std::string& p) {
            return r.timed<double>(x, p, [&](const json& y, const std::string& q) { return r.number(y, q); });
          });
        }
        return out;
      };
      f.phase.move_prob = scalars("move_prob");
      f.phase.abort_prob = scalars("abort_prob");
      if (const json* v = r.child(*ph, "florets")) {
        f.phase.florets = r.list(*v, "factors.phase.florets", [&](const json& x, const std::string& p) {
          return r.timed<Floret>(x, p, [&](const json& y, const std::string& q) { return r.numbers(y, q); });
        });
      }
    }
    auto table = [&](const json& x, const std::string& p) {
      return r.timed<TaskTable>(x, p, [&](const json& y, const std::string& q) { return TaskTable{r.numbers(y, q)}; });
    };
    if (const json* tk = r.child(j, "task")) {
      f.task = r.list(*tk, "factors.task", [&](const json& x, const std::string& p) {
        TaskFactor factor;
        if (!r.object(x, p, {"inactive"}, {"by_phase"})) return factor;
        if (const json* v = r.child(x, "inactive")) factor.inactive = table(*v, key(p, "inactive"));
        if (const json* v = r.child(x, "by_phase")) {
          const auto bp = key(p, "by_phase");
          if (!v->is_object()) {
            r.wrong_type(*v, bp, "object");
            return factor;
          }
          for (const auto& [name, value] : v->items()) {
            int phase = 0;
            try {
              std::size_t used = 0;
              phase = std::stoi(name, &used);
              if (used != name.size()) phase = 0;
            } catch (const std::exception&) {
              phase = 0;
            }
            if (phase < 1) {
              r.error("bad_phase_key", key(bp, name), "by_phase keys must be active phase numbers");
              continue;
            }
            factor.indicative.emplace(phase, table(value, key(bp, name)));
          }
        }
        return factor;
      });
    }
    if (const json* in = r.child(j, "intensity")) {
      f.intensity = r.list(*in, "factors.intensity", [&](const json& x, const std::string& p) {
        IntensityFactor factor;
        if (!r.object(x, p, {"family", "table"}, {"alphabet"})) return factor;
        if (const json* v = r.child(x, "family")) {
          const auto family = r.string(*v, key(p, "family"));
          if (family == "gaussian") {
            factor.family = EmissionFamily::Gaussian;
          } else if (family != "categorical") {
            r.error("unknown_family", key(p, "family"), "family must be categorical or gaussian");
          }
        }
        if (const json* v = r.child(x, "alphabet")) factor.alphabet = r.integer(*v, key(p, "alphabet"));
        if (const json* v = r.child(x, "table")) {
          factor.table = r.timed<EmissionTable>(*v, key(p, "table"), [&](const json& y, const std::string& q) {
            return emission(y, q, factor.family);
          });
        }
        return factor;
      });
    }
  }

  void success(const json& j) {
    if (!r.object(j, "success", {"phases"}, {"required_tasks"})) return;
    if (const json* v = r.child(j, "phases")) doc.model.success.phases = r.indices(*v, "success.phases", 0);
    if (const json* v = r.child(j, "required_tasks")) {
      for (int k : r.indices(*v, "success.required_tasks", 1)) {
        if (k < 0 || k >= 32) {
          r.error("task_out_of_range", "success.required_tasks", "required task is not a task index");
          continue;
        }
        doc.model.success.required |= TaskMask{1} << k;
      }
    }
  }

  FactorOverrides overrides(const json& j, const std::string& path) {
    FactorOverrides out;
    if (!r.object(j, path, {}, {"phases", "tasks", "intensities"})) return out;
    if (const json* v = r.child(j, "phases")) {
      out.phases = r.list(*v, key(path, "phases"), [&](const json& x, const std::string& p) {
        PhaseOverride o;
        if (!r.object(x, p, {}, {"phase", "move_prob", "abort_prob"})) return o;
        if (const json* y = r.child(x, "phase")) o.phase = r.integer(*y, key(p, "phase"));
        if (const json* y = r.child(x, "move_prob")) o.move_prob = r.number(*y, key(p, "move_prob"));
        if (const json* y = r.child(x, "abort_prob")) o.abort_prob = r.number(*y, key(p, "abort_prob"));
        return o;
      });
    }
    if (const json* v = r.child(j, "tasks")) {
      out.tasks = r.list(*v, key(path, "tasks"), [&](const json& x, const std::string& p) {
        TaskForcing f;
        if (!r.object(x, p, {"task", "value"}, {"phase"})) return f;
        if (const json* y = r.child(x, "phase")) f.phase = r.integer(*y, key(p, "phase"));
        if (const json* y = r.child(x, "task")) f.task = r.integer(*y, key(p, "task")) - 1;
        if (const json* y = r.child(x, "value")) {
          if (y->is_boolean()) {
            f.value = y->get<bool>();
          } else {
            const int v = r.integer(*y, key(p, "value"));
            if (v != 0 && v != 1) r.error("wrong_type", key(p, "value"), "task values are 0 or 1");
            f.value = v == 1;
          }
        }
        return f;
      });
    }
    if (const json* v = r.child(j, "intensities")) {
      out.intensities = r.list(*v, key(path, "intensities"), [&](const json& x, const std::string& p) {
        IntensityOverride o;
        if (!r.object(x, p, {"task", "table"}, {"offset", "length"})) return o;
        if (const json* y = r.child(x, "task")) o.task = r.integer(*y, key(p, "task")) - 1;
        if (const json* y = r.child(x, "offset")) o.offset = r.integer(*y, key(p, "offset"));
        if (const json* y = r.child(x, "length")) o.length = r.integer(*y, key(p, "length"));
        const auto& inf = doc.model.factors.intensity;
        const auto family = o.task >= 0 && o.task < static_cast<int>(inf.size()) ? inf[o.task].family
                                                                               : EmissionFamily::Categorical;
        if (const json* y = r.child(x, "table")) o.table = emission(*y, key(p, "table"), family);
        return o;
      });
    }
    return out;
  }

  Intervention intervention(const json& j, const std::string& path) {
    Intervention d;
    if (!r.object(j, path, {"name", "kind"},
                  {"t0", "t1", "overrides", "disable_prob", "abort_success", "betrayal_prob"})) {
      return d;
    }
    if (const json* v = r.child(j, "name")) d.name = r.string(*v, key(path, "name"));
    if (const json* v = r.child(j, "kind")) {
      const auto kind = r.string(*v, key(path, "kind"));
      if (auto k = intervention_kind_from_string(kind)) {
        d.kind = *k;
      } else {
        r.error("unknown_kind", key(path, "kind"), "unknown intervention kind '" + kind + "'");
      }
    }
    if (const json* v = r.child(j, "t0")) d.t0 = r.integer(*v, key(path, "t0"));
    if (const json* v = r.child(j, "t1")) d.t1 = r.integer(*v, key(path, "t1"));
    if (const json* v = r.child(j, "disable_prob")) d.disable_prob = r.number(*v, key(path, "disable_prob"));
    if (const json* v = r.child(j, "abort_success")) d.abort_success = r.number(*v, key(path, "abort_success"));
    if (const json* v = r.child(j, "betrayal_prob")) d.betrayal_prob = r.number(*v, key(path, "betrayal_prob"));
    if (const json* v = r.child(j, "overrides")) d.overrides = overrides(*v, key(path, "overrides"));
    return d;
  }

  Reaction reaction(const json& j, const std::string& path) {
    Reaction re;
    if (!r.object(j, path, {"id"}, {"description", "overrides"})) return re;
    if (const json* v = r.child(j, "id")) re.id = r.string(*v, key(path, "id"));
    if (const json* v = r.child(j, "description")) re.description = r.string(*v, key(path, "description"));
    if (const json* v = r.child(j, "overrides")) re.overrides = overrides(*v, key(path, "overrides"));
    return re;
  }

  AdversaryProfile profile(const json& j, const std::string& path) {
    AdversaryProfile pr;
    if (!r.object(j, path, {"name", "u_a_scenarios"}, {"capability", "discovery", "epsilon"})) return pr;
    if (const json* v = r.child(j, "name")) pr.name = r.string(*v, key(path, "name"));
    if (const json* v = r.child(j, "epsilon")) pr.epsilon = r.number(*v, key(path, "epsilon"));
    if (const json* v = r.child(j, "u_a_scenarios")) {
      pr.scenarios = r.list(*v, key(path, "u_a_scenarios"), [&](const json& x, const std::string& p) {
        UtilityScenario s;
        if (!r.object(x, p, {"u_a", "weight"})) return s;
        if (const json* y = r.child(x, "u_a")) s.u_a = r.number(*y, key(p, "u_a"));
        if (const json* y = r.child(x, "weight")) s.weight = r.number(*y, key(p, "weight"));
        return s;
      });
    }
    if (const json* v = r.child(j, "capability")) {
      const auto cp = key(path, "capability");
      if (!v->is_object()) {
        r.wrong_type(*v, cp, "object");
      } else {
        for (const auto& [name, list] : v->items()) {
          auto kind = intervention_kind_from_string(name);
          if (!kind) {
            r.error("unknown_kind", key(cp, name), "unknown intervention kind '" + name + "'");
            continue;
          }
          pr.capability[*kind] = r.list(list, key(cp, name), [&](const json& x, const std::string& p) {
            CapabilityRealization c;
            if (!r.object(x, p, {"reactions"}, {"weight"})) return c;
            if (const json* y = r.child(x, "weight")) c.weight = r.number(*y, key(p, "weight"));
            if (const json* y = r.child(x, "reactions")) c.reactions = r.strings(*y, key(p, "reactions"));
            return c;
          });
        }
      }
    }
    if (const json* v = r.child(j, "discovery")) {
      const auto dp = key(path, "discovery");
      if (!v->is_object()) {
        r.wrong_type(*v, dp, "object");
      } else {
        for (const auto& [name, x] : v->items()) {
          DiscoverySetting s;
          const auto p = key(dp, name);
          if (r.object(x, p, {}, {"betrayal_prob", "local_discovery_prob"})) {
            if (const json* y = r.child(x, "betrayal_prob")) s.betrayal_prob = r.number(*y, key(p, "betrayal_prob"));
            if (const json* y = r.child(x, "local_discovery_prob")) {
              s.local_discovery_prob = r.number(*y, key(p, "local_discovery_prob"));
            }
          }
          pr.discovery[name] = s;
        }
      }
    }
    return pr;
  }

  void read(const json& j) {
    if (!r.object(j, "", {"meta", "phases", "tasks", "factors"},
                  {"success", "interventions", "reactions", "adversary_profiles"})) {
      return;
    }
    if (const json* v = r.child(j, "meta")) meta(*v);
    if (const json* v = r.child(j, "phases")) phases(*v);
    if (const json* v = r.child(j, "tasks")) tasks(*v);
    if (const json* v = r.child(j, "factors")) factors(*v);
    if (const json* v = r.child(j, "success")) success(*v);
    if (const json* v = r.child(j, "interventions")) {
      doc.interventions = r.list(*v, "interventions", [&](const json& x, const std::string& p) { return intervention(x, p); });
    }
    if (const json* v = r.child(j, "reactions")) {
      doc.reactions = r.list(*v, "reactions", [&](const json& x, const std::string& p) { return reaction(x, p); });
    }
    if (const json* v = r.child(j, "adversary_profiles")) {
      doc.profiles = r.list(*v, "adversary_profiles", [&](const json& x, const std::string& p) { return profile(x, p); });
    }
  }
};

template <class T>
void check_unique(const std::vector<T>& items, const std::string& path, auto name_of, std::vector<Issue>& errors) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& name = name_of(items[i]);
    if (name.empty()) errors.push_back({"missing_name", at(path, i), "name must not be empty"});
    if (!seen.insert(name).second) errors.push_back({"duplicate_name", at(path, i), "duplicate name '" + name + "'"});
  }
}

// Semantic checks once the document has the right shape.
void check_document(const ModelDocument& doc, ParseResult& result) {
  const auto report = validate(doc.model);
  result.errors.insert(result.errors.end(), report.errors.begin(), report.errors.end());
  result.warnings.insert(result.warnings.end(), report.warnings.begin(), report.warnings.end());
  if (!report.ok()) return; // catalogue checks index into a well-formed model
  check_unique(doc.interventions, "interventions", [](const Intervention& d) -> const std::string& { return d.name; },
               result.errors);
  check_unique(doc.reactions, "reactions", [](const Reaction& r) -> const std::string& { return r.id; }, result.errors);
  check_unique(doc.profiles, "adversary_profiles", [](const AdversaryProfile& p) -> const std::string& { return p.name; },
               result.errors);
  for (std::size_t i = 0; i < doc.interventions.size(); ++i) {
    auto issues = check_intervention(doc.model, doc.interventions[i], at("interventions", i));
    result.errors.insert(result.errors.end(), issues.begin(), issues.end());
  }
  for (std::size_t i = 0; i < doc.reactions.size(); ++i) {
    auto issues = check_overrides(doc.model, doc.reactions[i].overrides, at("reactions", i) + ".overrides");
    result.errors.insert(result.errors.end(), issues.begin(), issues.end());
  }
  for (std::size_t i = 0; i < doc.profiles.size(); ++i) {
    auto issues = check_profile(doc.profiles[i], doc.reactions, at("adversary_profiles", i));
    result.errors.insert(result.errors.end(), issues.begin(), issues.end());
  }
}

} // namespace

ParseResult parse_document(const json& j) {
  DocReader reader;
  reader.read(j);
  ParseResult result;
  result.errors = std::move(reader.r.errors);
  if (result.errors.empty()) check_document(reader.doc, result);
  if (result.errors.empty()) result.document = std::move(reader.doc);
  return result;
}

ParseResult parse_document(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset > 0 ? offset - 1 : 0), '\n');
    ParseResult result;
    std::string message = e.what();
    if (auto pos = message.find("syntax error"); pos != std::string::npos) message = message.substr(pos);
    result.errors.push_back({"syntax_error", "line " + std::to_string(line), message});
    return result;
  }
  return parse_document(j);
}

Intervention intervention_from_json(const json& j, const ModelDocument& doc) {
  DocReader reader;
  reader.doc.model = doc.model;
  auto d = reader.intervention(j, "intervention");
  auto errors = std::move(reader.r.errors);
  if (errors.empty()) errors = check_intervention(doc.model, d, "intervention");
  if (!errors.empty()) throw Error(errors.front().code, errors.front().path + ": " + errors.front().message);
  return d;
}

ModelDocument parse_document_or_throw(std::string_view text) {
  auto result = parse_document(text);
  if (!result.document) {
    const auto& first = result.errors.front();
    throw Error(first.code, format_issues(result.errors));
  }
  return std::move(*result.document);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelDocument load_document(const std::string& path) { return parse_document_or_throw(read_file(path)); }

namespace {

template <class T, class F>
json timed_json(const Timed<T>& timed, F&& plain) {
  if (timed.time_homogeneous()) return plain(timed.base());
  json overrides = json::array();
  for (const auto& o : timed.overrides()) {
    json entry{{"from", o.from}, {"value", plain(*o.value)}};
    if (o.to != kForever) entry["to"] = o.to;
    overrides.push_back(std::move(entry));
  }
  return json{{"value", plain(timed.base())}, {"overrides", std::move(overrides)}};
}

json shifted(const std::vector<int>& xs, int shift) {
  json out = json::array();
  for (int x : xs) out.push_back(x + shift);
  return out;
}

json shifted_lists(const std::vector<std::vector<int>>& xs, int shift) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(shifted(x, shift));
  return out;
}

json emission_json(const EmissionTable& t, EmissionFamily family) {
  if (family == EmissionFamily::Categorical) return t.categorical;
  return json{{"mean", t.mean}, {"variance", t.variance}};
}

json overrides_json(const FactorOverrides& ov, const PlotModel& model) {
  json out = json::object();
  if (!ov.phases.empty()) {
    json list = json::array();
    for (const auto& o : ov.phases) {
      json e = json::object();
      if (o.phase) e["phase"] = *o.phase;
      if (o.move_prob) e["move_prob"] = *o.move_prob;
      if (o.abort_prob) e["abort_prob"] = *o.abort_prob;
      list.push_back(std::move(e));
    }
    out["phases"] = std::move(list);
  }
  if (!ov.tasks.empty()) {
    json list = json::array();
    for (const auto& f : ov.tasks) {
      json e{{"task", f.task + 1}, {"value", f.value ? 1 : 0}};
      if (f.phase) e["phase"] = *f.phase;
      list.push_back(std::move(e));
    }
    out["tasks"] = std::move(list);
  }
  if (!ov.intensities.empty()) {
    json list = json::array();
    for (const auto& o : ov.intensities) {
      const auto family = model.factors.intensity[o.task].family;
      json e{{"task", o.task + 1}, {"table", emission_json(o.table, family)}};
      if (o.offset != 0) e["offset"] = o.offset;
      if (o.length) e["length"] = *o.length;
      list.push_back(std::move(e));
    }
    out["intensities"] = std::move(list);
  }
  return out;
}

} // namespace

json intervention_to_json(const Intervention& d, const PlotModel& model) {
  json e{{"name", d.name}, {"kind", to_string(d.kind)}, {"t0", d.t0}};
  if (d.t1) e["t1"] = *d.t1;
  if (d.disable_prob != 0) e["disable_prob"] = d.disable_prob;
  if (d.abort_success != 0) e["abort_success"] = d.abort_success;
  if (d.betrayal_prob != 0) e["betrayal_prob"] = d.betrayal_prob;
  if (!d.overrides.empty()) e["overrides"] = overrides_json(d.overrides, model);
  return e;
}

json document_to_json(const ModelDocument& doc) {
  const PlotModel& m = doc.model;
  json meta{{"name", m.name}, {"version", doc.version}, {"horizon", m.horizon}};
  if (!doc.time_step.empty()) meta["time_step"] = doc.time_step;
  if (!m.time_labels.empty()) meta["time_labels"] = m.time_labels;

  json phases{{"inactive_label", m.phases.inactive_label},
              {"labels", m.phases.labels},
              {"edges", shifted_lists(m.phases.edges, 0)},
              {"stages", shifted(m.phases.stages, 1)},
              {"initial", m.factors.phase.initial}};

  json tasks{{"labels", m.tasks.labels},
             {"contemporaneous_parents", shifted_lists(m.tasks.contemporaneous_parents, 1)},
             {"cross_slice_parents", shifted_lists(m.tasks.cross_slice_parents, 1)},
             {"intensity_parents", shifted_lists(m.tasks.intensity_parents, 1)},
             {"task_sets", shifted_lists(m.bipartite.task_sets, 1)}};

  auto scalar = [](double v) { return json(v); };
  auto vec = [](const std::vector<double>& v) { return json(v); };
  auto table = [](const TaskTable& t) { return json(t.p_one); };
  json move = json::array(), abort = json::array(), florets = json::array();
  for (const auto& t : m.factors.phase.move_prob) move.push_back(timed_json(t, scalar));
  for (const auto& t : m.factors.phase.abort_prob) abort.push_back(timed_json(t, scalar));
  for (const auto& t : m.factors.phase.florets) florets.push_back(timed_json(t, vec));
  json task = json::array();
  for (const auto& f : m.factors.task) {
    json e{{"inactive", timed_json(f.inactive, table)}};
    if (!f.indicative.empty()) {
      json by_phase = json::object();
      for (const auto& [j, t] : f.indicative) by_phase[std::to_string(j)] = timed_json(t, table);
      e["by_phase"] = std::move(by_phase);
    }
    task.push_back(std::move(e));
  }
  json intensity = json::array();
  for (const auto& f : m.factors.intensity) {
    json e{{"family", f.family == EmissionFamily::Categorical ? "categorical" : "gaussian"},
           {"table", timed_json(f.table, [&](const EmissionTable& t) { return emission_json(t, f.family); })}};
    if (f.family == EmissionFamily::Categorical) e["alphabet"] = f.alphabet;
    intensity.push_back(std::move(e));
  }
  json factors{{"phase", {{"move_prob", move}, {"abort_prob", abort}, {"florets", florets}}},
               {"task", task},
               {"intensity", intensity}};

  json required = json::array();
  for (int k = 0; k < m.n(); ++k) {
    if (task_bit(m.success.required, k)) required.push_back(k + 1);
  }
  json success{{"phases", m.success.phases}, {"required_tasks", required}};

  json doc_json{{"meta", meta}, {"phases", phases}, {"tasks", tasks}, {"factors", factors}, {"success", success}};

  json interventions = json::array();
  for (const auto& d : doc.interventions) interventions.push_back(intervention_to_json(d, m));
  if (!interventions.empty()) doc_json["interventions"] = std::move(interventions);

  json reactions = json::array();
  for (const auto& r : doc.reactions) {
    json e{{"id", r.id}};
    if (!r.description.empty()) e["description"] = r.description;
    if (!r.overrides.empty()) e["overrides"] = overrides_json(r.overrides, m);
    reactions.push_back(std::move(e));
  }
  if (!reactions.empty()) doc_json["reactions"] = std::move(reactions);

  json profiles = json::array();
  for (const auto& p : doc.profiles) {
    json scenarios = json::array();
    for (const auto& s : p.scenarios) scenarios.push_back({{"u_a", s.u_a}, {"weight", s.weight}});
    json e{{"name", p.name}, {"u_a_scenarios", scenarios}, {"epsilon", p.epsilon}};
    if (!p.capability.empty()) {
      json cap = json::object();
      for (const auto& [kind, list] : p.capability) {
        json arr = json::array();
        for (const auto& c : list) arr.push_back({{"weight", c.weight}, {"reactions", c.reactions}});
        cap[to_string(kind)] = std::move(arr);
      }
      e["capability"] = std::move(cap);
    }
    if (!p.discovery.empty()) {
      json disc = json::object();
      for (const auto& [name, s] : p.discovery) {
        json x{{"local_discovery_prob", s.local_discovery_prob}};
        if (s.betrayal_prob) x["betrayal_prob"] = *s.betrayal_prob;
        disc[name] = std::move(x);
      }
      e["discovery"] = std::move(disc);
    }
    profiles.push_back(std::move(e));
  }
  if (!profiles.empty()) doc_json["adversary_profiles"] = std::move(profiles);
  return doc_json;
}

std::string serialize_document(const ModelDocument& doc) { return document_to_json(doc).dump(2) + "\n"; }

std::string format_issues(std::span<const Issue> issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += '\n';
    out += i.code + " " + i.path + ": " + i.message;
  }
  return out;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  const auto n = trajectory.intensities.empty() ? 0 : trajectory.intensities.front().size();
  std::vector<std::string> header{"t", "w"};
  for (std::size_t k = 1; k <= n; ++k) header.push_back("theta_" + std::to_string(k));
  for (std::size_t k = 1; k <= n; ++k) header.push_back("z_" + std::to_string(k));
  CsvWriter csv(header);
  for (std::size_t t = 0; t < trajectory.length(); ++t) {
    std::vector<std::string> row{std::to_string(t + 1), std::to_string(trajectory.phases[t])};
    for (std::size_t k = 0; k < n; ++k) row.push_back(task_bit(trajectory.tasks[t], static_cast<int>(k)) ? "1" : "0");
    for (double z : trajectory.intensities[t]) row.push_back(format_number(z));
    csv.row(row);
  }
  return csv.str();
}

std::vector<Observation> read_observations(std::string_view text, int n) {
  const auto table = parse_csv(text);
  std::vector<int> columns;
  for (int k = 1; k <= n; ++k) {
    const int c = table.column("z_" + std::to_string(k));
    if (c < 0) throw Error("csv_error", "observations need a z_" + std::to_string(k) + " column");
    columns.push_back(c);
  }
  const int t_col = table.column("t");
  std::vector<Observation> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto parse = [&](const std::string& cell) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size()) return v;
      } catch (const std::exception&) {
      }
      throw Error("csv_error", "line " + std::to_string(table.lines[r]) + ": '" + cell + "' is not a number");
    };
    if (t_col >= 0 && parse(row[t_col]) != static_cast<double>(r + 1)) {
      throw Error("csv_error", "line " + std::to_string(table.lines[r]) + ": expected t=" + std::to_string(r + 1));
    }
    Observation z;
    for (int c : columns) z.push_back(parse(row[c]));
    out.push_back(std::move(z));
  }
  return out;
}

std::string marginals_csv(const PlotModel& model, std::span<const BeliefState> beliefs) {
  CsvWriter csv({"t", "time_label", "phase_label", "probability"});
  for (const auto& b : beliefs) {
    const auto marginal = phase_marginal(b);
    const auto label_index = static_cast<std::size_t>(b.t - 1);
    const auto time_label = b.t >= 1 && label_index < model.time_labels.size() ? model.time_labels[label_index] : "";
    for (std::size_t j = 0; j < marginal.size(); ++j) {
      csv.row({std::to_string(b.t), time_label, model.phases.label(static_cast<Phase>(j)), format_number(marginal[j])});
    }
  }
  return csv.str();
}

} // namespace plotsmith
