#include "chronos/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "chronos/corpus.hpp"
#include "chronos/reasoning.hpp"

namespace chronos::cli {

namespace {

using nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

ScenarioSource load_source(const std::string& input) {
  if (input.rfind("corpus:", 0) == 0) {
    const std::string id = input.substr(7);
    const CorpusEntry* entry = find_corpus(id);
    if (!entry) throw Error(Errc::IoError, "unknown corpus scenario '" + id + "'");
    return {entry->text, input};
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read '" + input + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return {text.str(), input};
}

ElaborationOptions options_from(const RunConfig& config) {
  ElaborationOptions opt;
  opt.tol = config.tol;
  opt.tol_prob = config.tol_prob;
  opt.mode = config.mode;
  opt.rho_name = config.rho_name;
  opt.rho_prime_name = config.rho_prime_name;
  opt.max_dim = config.max_dim;
  return opt;
}

/// Probabilities are reported with 12 significant digits, in text and JSON
/// alike.
std::string format_probability(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", p);
  return buf;
}

double rounded_probability(double p) { return std::strtod(format_probability(p).c_str(), nullptr); }

ordered_json grid_json(const std::vector<double>& grid) {
  ordered_json a = ordered_json::array();
  for (double t : grid) a.push_back(t);
  return a;
}

ordered_json summary_json(const FrameworkSummary& s) {
  ordered_json j;
  j["minimal_elements"] = s.minimal_count;
  j["grid"] = grid_json(s.grid);
  j["worst_pair_magnitude"] = s.worst_magnitude;
  j["consistent"] = s.consistent;
  return j;
}

std::string grid_text(const std::vector<double>& grid) {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < grid.size(); ++i) {
    if (i) os << ", ";
    os << grid[i];
  }
  os << '}';
  return os.str();
}

struct QueryOutcome {
  std::string id;
  std::string verdict;
  bool has_probability = false;
  double probability = 0.0;
  FrameworkSummary summary;
  bool has_summary = false;
  std::string note;
  std::string error_code;
  long timing_us = 0;
};

QueryOutcome execute(const Scenario& scen, const ScenarioQuery& q, const Context& ctx) {
  QueryOutcome out;
  out.id = q.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    Verdict v = query(scen.data, q.targets, q.conditions, ctx);
    out.verdict = verdict_kind_name(v.kind);
    if (v.kind == Verdict::Kind::Probability || v.kind == Verdict::Kind::True ||
        v.kind == Verdict::Kind::False) {
      out.has_probability = true;
      out.probability = rounded_probability(v.probability);
    }
    out.summary = v.summary;
    out.has_summary = v.kind != Verdict::Kind::DataInconsistent;
    out.note = v.note;
  } catch (const Error& e) {
    out.verdict = "error";
    out.error_code = errc_name(e.code());
    out.note = e.message();
  }
  out.timing_us = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return out;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Scenario scen;
  try {
    scen = elaborate(parse(load_source(config.input)), options_from(config));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  std::vector<QueryOutcome> outcomes;
  bool any_error = false;
  bool any_data_inconsistent = false;
  try {
    const Context ctx = scen.context();
    for (const ScenarioQuery& q : scen.queries) {
      QueryOutcome o = execute(scen, q, ctx);
      any_error |= o.verdict == "error";
      any_data_inconsistent |= o.verdict == "data-inconsistent";
      outcomes.push_back(std::move(o));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  if (config.json) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["source"] = config.input;
    j["mode"] = consistency_mode_name(config.mode);
    j["tolerance"] = config.tol;
    j["results"] = ordered_json::array();
    for (const QueryOutcome& o : outcomes) {
      ordered_json r;
      r["id"] = o.id;
      r["verdict"] = o.verdict;
      if (o.has_probability) r["probability"] = o.probability;
      if (o.has_summary) r["framework"] = summary_json(o.summary);
      if (!o.note.empty()) r["note"] = o.note;
      if (!o.error_code.empty()) r["error"] = o.error_code;
      r["timing_us"] = o.timing_us;
      j["results"].push_back(std::move(r));
    }
    out << j.dump(2) << "\n";
  } else {
    out << "# " << config.input << "  mode=" << consistency_mode_name(config.mode)
        << "  tol=" << config.tol << "\n";
    for (const QueryOutcome& o : outcomes) {
      out << o.id << ": " << o.verdict;
      if (o.has_probability) out << "  p = " << format_probability(o.probability);
      if (o.has_summary)
        out << "  [" << o.summary.minimal_count << " elements, grid "
            << grid_text(o.summary.grid) << ", worst " << o.summary.worst_magnitude << "]";
      if (!o.error_code.empty()) out << "  (" << o.error_code << ")";
      if (!o.note.empty()) out << "\n    " << o.note;
      out << "\n";
    }
  }
  if (any_data_inconsistent) return kExitDataInconsistent;
  if (any_error) return kExitError;
  return kExitOk;
}

int check_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Scenario scen;
  try {
    scen = elaborate(parse(load_source(config.input)), options_from(config));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  if (config.json) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["source"] = config.input;
    j["mode"] = consistency_mode_name(config.mode);
    j["tolerance"] = config.tol;
    j["frameworks"] = ordered_json::array();
    for (const ScenarioFramework& f : scen.frameworks) {
      ordered_json r;
      r["name"] = f.name;
      r["consistent"] = f.report.verdict;
      r["minimal_elements"] = f.decomposition->size();
      r["worst_pair"] = ordered_json::array({f.report.worst_j, f.report.worst_k});
      r["worst_magnitude"] = f.report.worst_magnitude;
      r["bound"] = f.report.tolerance;
      r["expected_inconsistent"] = f.expect_inconsistent;
      if (f.dropped_zero_elements) r["dropped_zero_elements"] = f.dropped_zero_elements;
      j["frameworks"].push_back(std::move(r));
    }
    out << j.dump(2) << "\n";
  } else {
    out << "# " << config.input << "  mode=" << consistency_mode_name(config.mode)
        << "  tol=" << config.tol << "\n";
    for (const ScenarioFramework& f : scen.frameworks) {
      out << f.name << ": " << (f.report.verdict ? "consistent" : "INCONSISTENT") << "  ("
          << f.decomposition->size() << " elements, worst ";
      if (f.report.worst_j >= 0)
        out << "(" << f.report.worst_j << "," << f.report.worst_k << ") = "
            << f.report.worst_magnitude;
      else
        out << "none";
      out << ", bound " << f.report.tolerance << ")";
      if (f.expect_inconsistent) out << "  [expected inconsistent]";
      if (f.dropped_zero_elements) out << "  [dropped " << f.dropped_zero_elements << " zero]";
      out << "\n";
    }
  }
  return kExitOk;
}

int corpus_list_command(bool json, std::ostream& out) {
  if (json) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["corpus"] = ordered_json::array();
    for (const CorpusEntry& e : corpus()) {
      ordered_json r;
      r["id"] = e.id;
      r["description"] = e.description;
      j["corpus"].push_back(std::move(r));
    }
    out << j.dump(2) << "\n";
  } else {
    for (const CorpusEntry& e : corpus())
      out << "corpus:" << e.id << "\n    " << e.description << "\n";
  }
  return kExitOk;
}

}  // namespace chronos::cli
