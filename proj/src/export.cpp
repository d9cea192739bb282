#include "wfq/export.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "wfq/error.hpp"

namespace wfq {

using nlohmann::json;

namespace {

std::string var_name(JobId job, Slot t) { return "x_" + std::to_string(job) + "_" + std::to_string(t); }

// Wraps long rows; LP readers limit line length.
class RowWriter {
 public:
  explicit RowWriter(std::ostream& out) : out_(out) {}

  void begin(const std::string& name) {
    out_ << ' ' << name << ':';
    width_ = name.size() + 2;
    first_ = true;
  }

  void term(Coeff c, const std::string& var) {
    std::ostringstream t;
    if (first_) {
      if (c < 0) t << " -";
      t << ' ';
    } else {
      t << (c < 0 ? " - " : " + ");
    }
    const Coeff a = c < 0 ? -c : c;
    if (a != 1) t << a << ' ';
    t << var;
    const std::string s = t.str();
    if (width_ + s.size() > 200) {
      out_ << "\n  ";
      width_ = 2;
    }
    out_ << s;
    width_ += s.size();
    first_ = false;
  }

  void end(const char* sense, Coeff rhs) { out_ << ' ' << sense << ' ' << rhs << '\n'; }
  void end() { out_ << '\n'; }

 private:
  std::ostream& out_;
  std::size_t width_ = 0;
  bool first_ = true;
};

}  // namespace

void write_lp(std::ostream& out, const WorkflowInstance& inst, const ObjectiveConfig& obj) {
  if (auto report = validate_instance(inst); !report.ok()) throw ValidationError(report.summary());
  const int n = inst.size();
  const auto& avail = inst.resources.available();
  std::vector<std::vector<Slot>> slots(static_cast<std::size_t>(n));
  for (JobId i = 0; i < n; ++i) {
    for (Slot t = 0; t < inst.horizon; ++t) {
      if (inst.resource(i) <= avail[t]) slots[i].push_back(t);
    }
  }

  RowWriter row(out);
  out << "\\ workflow scheduling: " << n << " jobs, " << inst.horizon << " slots\n";
  if (inst.seed) out << "\\ seed " << *inst.seed << '\n';
  out << "Minimize\n";
  row.begin("obj");
  bool any = false;
  for (JobId i = 0; i < n; ++i) {
    for (Slot t : slots[i]) {
      if (Coeff c = obj.cost(t); c != 0) {
        row.term(c, var_name(i, t));
        any = true;
      }
    }
  }
  // Keep the objective row non-empty so every reader accepts it.
  if (!any) {
    for (JobId i = 0; i < n && !any; ++i) {
      if (!slots[i].empty()) {
        out << " 0 " << var_name(i, slots[i].front());
        any = true;
      }
    }
  }
  row.end();

  out << "Subject To\n";
  for (JobId i = 0; i < n; ++i) {
    row.begin("once_" + std::to_string(i));
    for (Slot t : slots[i]) row.term(1, var_name(i, t));
    row.end("=", 1);
  }
  for (const Edge& e : inst.dag.edges()) {
    row.begin("prec_" + std::to_string(e.parent) + "_" + std::to_string(e.child));
    for (Slot t : slots[e.child]) {
      if (t != 0) row.term(t, var_name(e.child, t));
    }
    for (Slot t : slots[e.parent]) {
      if (t != 0) row.term(-t, var_name(e.parent, t));
    }
    // A parent only admissible at slot 0 leaves no parent terms; the row
    // still needs at least one variable.
    if (std::all_of(slots[e.child].begin(), slots[e.child].end(), [](Slot t) { return t == 0; }) &&
        std::all_of(slots[e.parent].begin(), slots[e.parent].end(), [](Slot t) { return t == 0; })) {
      row.term(0, var_name(e.child, slots[e.child].front()));
    }
    row.end(">=", 1);
  }
  for (Slot t = 0; t < inst.horizon; ++t) {
    bool has = false;
    for (JobId i = 0; i < n && !has; ++i) has = inst.resource(i) <= avail[t];
    if (!has) continue;
    row.begin("cap_" + std::to_string(t));
    for (JobId i = 0; i < n; ++i) {
      if (inst.resource(i) <= avail[t]) row.term(inst.resource(i), var_name(i, t));
    }
    row.end("<=", avail[t]);
  }
  out << "Binaries\n";
  for (JobId i = 0; i < n; ++i) {
    for (Slot t : slots[i]) out << ' ' << var_name(i, t) << '\n';
  }
  out << "End\n";
}

void export_lp(const WorkflowInstance& inst, const ObjectiveConfig& obj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_lp(out, inst, obj);
  if (!out) throw Error("write failed for " + path.string());
}

json qubo_to_json(const QuboModel& model) {
  json j;
  j["version"] = kQuboSchemaVersion;
  j["n_vars"] = model.n_vars();
  j["offset"] = model.combined.offset();
  j["terms"] = json::array();
  for (const QuboTerm& t : model.combined.terms()) j["terms"].push_back({t.i, t.j, t.coeff});
  json layout;
  layout["slot_offset"] = model.layout.slot_offset;
  layout["decisions"] = json::array();
  for (const DecisionVar& d : model.layout.decisions) layout["decisions"].push_back({d.job, d.slot});
  layout["slacks"] = json::array();
  for (const SlackGroup& g : model.layout.slacks) {
    layout["slacks"].push_back({{"kind", g.kind == SlackGroup::Kind::kResource ? "resource" : "once"},
                                {"owner", g.owner},
                                {"first", g.first},
                                {"width", g.width}});
  }
  j["layout"] = std::move(layout);
  j["weights"] = {{"one_start", model.weights.one_start},
                  {"order", model.weights.order},
                  {"resource", model.weights.resource}};
  if (model.source && model.source->seed) j["seed"] = *model.source->seed;
  return j;
}

QuadraticForm qubo_form_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version") || j["version"] != kQuboSchemaVersion) {
    throw SchemaError("unsupported QUBO schema version");
  }
  if (!j.contains("n_vars") || !j.contains("terms") || !j.contains("offset")) throw SchemaError("incomplete QUBO file");
  QuadraticForm form(j["n_vars"].get<int>());
  form.add_constant(j["offset"].get<Coeff>());
  for (const json& t : j["terms"]) {
    if (!t.is_array() || t.size() != 3) throw SchemaError("QUBO term must be [i, j, coeff]");
    form.add_quadratic(t[0].get<int>(), t[1].get<int>(), t[2].get<Coeff>());
  }
  return form;
}

}  // namespace wfq
