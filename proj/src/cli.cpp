#include "lorenzfit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lorenzfit/errors.hpp"
#include "lorenzfit/estimate.hpp"
#include "lorenzfit/grouped.hpp"
#include "lorenzfit/io.hpp"
#include "lorenzfit/measures.hpp"
#include "lorenzfit/select.hpp"
#include "lorenzfit/synth.hpp"

namespace lorenzfit::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Runs fn(i) for i in [0, n) on a small pool; results are written by index
// so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

std::vector<std::string> param_names(Family f) {
  switch (f) {
    case Family::GB2: return {"a", "b", "p", "q"};
    case Family::B2: return {"b", "p", "q"};
    case Family::SM: return {"a", "b", "q"};
    case Family::Dagum: return {"a", "b", "p"};
    case Family::Lognormal: return {"mu", "sigma"};
    case Family::Fisk: return {"a", "b"};
    case Family::Weibull: return {"a", "b"};
  }
  return {};
}

bool is_scale_param(Family f, const std::string& name) {
  return f == Family::Lognormal ? name == "mu" : name == "b";
}

std::string eps_key(double e) { return io::format_double(e); }

// A number, or null plus a reason code in row["nulls"].
void put(ordered_json& row, const std::string& key, std::optional<double> v, const std::string& reason) {
  if (v && std::isfinite(*v)) {
    row[key] = *v;
  } else {
    row[key] = nullptr;
    row["nulls"][key] = v ? "non_finite" : reason;
  }
}

struct FitOutcome {
  std::optional<FitResult> fit;
  std::string error;
};

ordered_json fit_row(const GroupedDataset& d, Family family, const char* method, const FitOutcome& oc,
                     const RunConfig& cfg) {
  ordered_json row;
  row["id"] = d.id;
  row["family"] = std::string(family_name(family));
  row["method"] = method;
  row["nulls"] = ordered_json::object();
  const double lb = lower_bound_gini(d);
  row["lower_bound_gini"] = lb;
  put(row, "survey_gini", d.survey_gini, "no_survey_gini");
  if (!oc.fit) {
    row["status"] = "error";
    row["error"] = oc.error;
    return row;
  }
  const FitResult& fr = *oc.fit;
  row["status"] = "ok";
  row["error"] = nullptr;
  row["estimator"] = std::string(method_name(fr.method));
  ordered_json params = ordered_json::object();
  const auto names = param_names(family);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (is_scale_param(family, names[i]) && !fr.scale_recovered) {
      params[names[i]] = nullptr;
      row["nulls"]["params." + names[i]] = d.mean ? "mean_undefined" : "no_mean";
    } else {
      params[names[i]] = fr.spec.params()[i];
    }
  }
  row["params"] = params;
  row["objective"] = fr.objective;
  row["converged"] = fr.converged;
  row["starts_tried"] = fr.starts_tried;
  row["k"] = fr.k;
  row["residuals"] = fr.residuals;

  // Gini: closed form or the 3F2 series, Monte Carlo when the series stalls.
  std::optional<double> gini, gini_se;
  std::string gini_reason = "mean_undefined";
  try {
    GiniValue gv;
    try {
      gv = gini_closed(fr.spec);
    } catch (const GiniSeriesNotConverged&) {
      gv = gini_mc(fr.spec, McConfig{cfg.mc_n, cfg.seed});
    }
    gini = gv.value;
    gini_se = gv.mc_std_error;
    row["gini_method"] = std::string(gini_method_name(gv.method));
  } catch (const std::exception&) {
    row["gini_method"] = nullptr;
  }
  put(row, "gini", gini, gini_reason);
  put(row, "gini_se", gini_se, gini ? "not_monte_carlo" : gini_reason);

  ordered_json atk = ordered_json::object();
  std::vector<double> ok_eps;
  for (double e : cfg.epsilons) {
    const bool exists = fr.spec.mean_exists() && (e <= 1.0 || fr.spec.moment_exists(1.0 - e));
    if (exists) ok_eps.push_back(e);
  }
  std::vector<double> atk_values;
  std::string atk_error;
  if (!ok_eps.empty()) {
    try {
      atk_values = mc_measures(fr.spec, ok_eps, McConfig{cfg.mc_n, cfg.seed}).atkinson;
    } catch (const std::exception& e) {
      atk_error = e.what();
    }
  }
  for (double e : cfg.epsilons) {
    const auto it = std::find(ok_eps.begin(), ok_eps.end(), e);
    const std::string key = eps_key(e);
    if (it != ok_eps.end() && !atk_values.empty()) {
      atk[key] = atk_values[static_cast<std::size_t>(it - ok_eps.begin())];
    } else {
      atk[key] = nullptr;
      row["nulls"]["atkinson." + key] = it == ok_eps.end() ? "moment_undefined" : "monte_carlo_failed";
    }
  }
  row["atkinson"] = atk;

  std::optional<WeightingMatrix> wm;
  std::string wm_reason = d.mean ? "second_moment_undefined" : "no_mean";
  if (fr.scale_recovered) {
    try {
      wm = weighting_matrix(fr.spec, d);
    } catch (const std::exception&) {
    }
  }
  const GofScores g = gof_scores(fr, wm ? &*wm : nullptr);
  row["rss"] = g.rss;
  row["aic"] = g.aic;
  row["bic"] = g.bic;
  put(row, "wssr", g.wssr, wm_reason);
  if (g.rss_floored) row["warnings"].push_back("rss is zero; floored at 1e-300 in aic/bic");
  for (const auto& w : fr.warnings) row["warnings"].push_back(w);
  return row;
}

std::vector<ordered_json> fit_dataset(const GroupedDataset& d, const RunConfig& cfg) {
  std::vector<ordered_json> rows;
  for (Family f : cfg.families) {
    FitOutcome nls;
    try {
      nls.fit = nls_fit(f, d);
    } catch (const std::exception& e) {
      nls.error = e.what();
    }
    ordered_json nls_row, gmm_row;
    // Without a mean GMM cannot run; the NLS rows are still reported.
    const bool want_nls = cfg.method != FitMethod::Gmm || !d.mean;
    if (want_nls) nls_row = fit_row(d, f, "nls", nls, cfg);
    if (cfg.method != FitMethod::Nls) {
      FitOutcome gmm;
      if (!d.mean) {
        gmm.error = "mean required for GMM";
      } else if (!nls.fit) {
        gmm.error = "first-stage NLS failed: " + nls.error;
      } else {
        try {
          gmm.fit = gmm_from_nls(*nls.fit, d);
        } catch (const std::exception& e) {
          gmm.error = e.what();
        }
      }
      gmm_row = fit_row(d, f, "gmm", gmm, cfg);
    }
    if (cfg.method == FitMethod::Both) {
      std::string closer = "undetermined";
      const auto& gn = nls_row["gini"];
      const auto& gg = gmm_row["gini"];
      if (d.survey_gini && gn.is_number() && gg.is_number()) {
        const double en = std::abs(gn.get<double>() - *d.survey_gini);
        const double eg = std::abs(gg.get<double>() - *d.survey_gini);
        closer = en < eg ? "nls" : (eg < en ? "gmm" : "tie");
      }
      nls_row["closer_to_survey"] = closer;
      gmm_row["closer_to_survey"] = closer;
    }
    if (want_nls) rows.push_back(std::move(nls_row));
    if (cfg.method != FitMethod::Nls) rows.push_back(std::move(gmm_row));
  }
  return rows;
}

std::string cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_fit_csv(std::ostream& out, const std::vector<ordered_json>& rows, const RunConfig& cfg) {
  const std::vector<std::string> pnames = {"a", "b", "p", "q", "mu", "sigma"};
  out << "id,family,method,status,converged,objective";
  for (const auto& p : pnames) out << ',' << p;
  out << ",gini,gini_method,gini_se,lower_bound_gini,survey_gini";
  for (double e : cfg.epsilons) out << ",atkinson_" << eps_key(e);
  out << ",aic,bic,wssr,closer_to_survey,error\n";
  for (const auto& r : rows) {
    auto get = [&](const char* k) { return r.contains(k) ? cell(r[k]) : std::string(); };
    out << get("id") << ',' << get("family") << ',' << get("method") << ',' << get("status") << ','
        << get("converged") << ',' << get("objective");
    for (const auto& p : pnames) {
      out << ',';
      if (r.contains("params") && r["params"].contains(p)) out << cell(r["params"][p]);
    }
    out << ',' << get("gini") << ',' << get("gini_method") << ',' << get("gini_se") << ',' << get("lower_bound_gini")
        << ',' << get("survey_gini");
    for (double e : cfg.epsilons) {
      out << ',';
      if (r.contains("atkinson")) out << cell(r["atkinson"][eps_key(e)]);
    }
    std::string err = get("error");
    std::replace(err.begin(), err.end(), ',', ';');
    out << ',' << get("aic") << ',' << get("bic") << ',' << get("wssr") << ',' << get("closer_to_survey") << ','
        << err << '\n';
  }
}

GroupingPolicy policy_for(const RunConfig& cfg, bool default_coding) {
  const bool on = cfg.coding.value_or(default_coding);
  return GroupingPolicy{cfg.groups, on, on, on};
}

void check_common(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv") throw std::invalid_argument("--format must be json or csv");
  if (cfg.groups < 2) throw std::invalid_argument("--groups must be at least 2");
  for (double e : cfg.epsilons)
    if (!(e >= 0.0)) throw std::invalid_argument("--epsilon values must be nonnegative");
  if (cfg.mc_n < 1000) throw std::invalid_argument("--mc-n must be at least 1000");
}

}  // namespace

FitMethod parse_fit_method(const std::string& s) {
  if (s == "nls") return FitMethod::Nls;
  if (s == "gmm") return FitMethod::Gmm;
  if (s == "both") return FitMethod::Both;
  throw std::invalid_argument("--method must be nls, gmm or both");
}

int cmd_fit(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log) {
  check_common(cfg);
  const auto records = io::read_grouped(in, io::format_for_path(cfg.input));
  std::vector<std::vector<ordered_json>> results(records.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
    const auto& rec = records[i];
    if (!rec.data) {
      ordered_json row;
      row["id"] = rec.id;
      row["line"] = rec.line;
      row["status"] = "invalid";
      row["error"] = rec.error;
      results[i].push_back(std::move(row));
      return;
    }
    results[i] = fit_dataset(*rec.data, cfg);
  });

  int status = kOk;
  std::vector<ordered_json> rows;
  for (auto& r : results) {
    for (auto& row : r) {
      if (row["status"] != "ok") {
        status = kRecordErrors;
        log << "warning: " << cell(row["id"]);
        if (row.contains("family")) log << " [" << cell(row["family"]) << '/' << cell(row["method"]) << ']';
        log << ": " << cell(row["error"]) << '\n';
      }
      rows.push_back(std::move(row));
    }
  }
  if (cfg.format == "csv") {
    write_fit_csv(out, rows, cfg);
  } else {
    for (const auto& row : rows) out << row.dump() << '\n';
  }
  return status;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  check_common(cfg);
  if (cfg.datasets < 1) throw std::invalid_argument("--datasets must be at least 1");
  const int sources = (cfg.preset ? 1 : 0) + (!cfg.mixture.empty() ? 1 : 0) + (!cfg.dist.empty() ? 1 : 0);
  if (sources > 1) throw std::invalid_argument("give at most one of --preset, --mixture, --dist");

  std::optional<MixtureSpec> mix;
  std::optional<FamilySpec> spec;
  std::string label;
  if (!cfg.dist.empty()) {
    spec = io::parse_family_spec(cfg.dist);
    label = spec->to_string();
  } else if (!cfg.mixture.empty()) {
    mix = io::parse_mixture_spec(cfg.mixture);
    label = "mixture";
  } else {
    const std::size_t p = cfg.preset.value_or(1);
    mix = mixture_preset(p);
    label = "preset" + std::to_string(p);
  }
  const std::string base = cfg.id.empty() ? label : cfg.id;

  std::ofstream micro_file;
  if (!cfg.microdata_out.empty()) {
    micro_file.open(cfg.microdata_out);
    if (!micro_file) throw std::runtime_error("cannot write " + cfg.microdata_out);
    micro_file << (cfg.datasets > 1 ? "dataset,income,weight\n" : "income,weight\n");
  }
  const GroupingPolicy policy = policy_for(cfg, false);
  for (std::size_t k = 0; k < cfg.datasets; ++k) {
    const std::uint64_t seed = cfg.seed + k;
    Microdata m = spec ? Microdata::unit(sample_spec(*spec, McConfig{cfg.n, seed})) : sample_mixture(*mix, cfg.n, seed);
    const std::string id = cfg.datasets > 1 ? base + "-" + std::to_string(k + 1) : base;
    const GroupedDataset d = microdata_to_grouped(m, policy, std::nullopt, id);
    ordered_json j = ordered_json::parse(io::dataset_to_jsonl(d));
    j["seed"] = seed;
    j["n"] = cfg.n;
    j["source"] = label;
    out << j.dump() << '\n';
    if (micro_file.is_open()) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (cfg.datasets > 1) micro_file << id << ',';
        micro_file << io::format_double(m.values[i]) << ',' << io::format_double(m.weights[i]) << '\n';
      }
    }
  }
  log << "simulated " << cfg.datasets << " dataset(s) from " << label << " with seed " << cfg.seed << '\n';
  return kOk;
}

int cmd_group(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream&) {
  check_common(cfg);
  const auto hd = io::read_microdata(in);
  std::optional<std::span<const double>> sizes;
  if (hd.sizes) sizes = std::span<const double>(*hd.sizes);
  const GroupedDataset d =
      microdata_to_grouped(hd.micro, policy_for(cfg, true), sizes, cfg.id.empty() ? "microdata" : cfg.id);
  if (cfg.format == "csv") {
    out << "id";
    for (std::size_t j = 1; j <= d.J(); ++j) out << ",share" << j;
    out << ",mean,gini\n" << d.id;
    for (double c : d.shares()) out << ',' << io::format_double(c);
    out << ',' << io::format_double(*d.mean) << ',' << io::format_double(*d.survey_gini) << '\n';
  } else {
    out << io::dataset_to_jsonl(d) << '\n';
  }
  return kOk;
}

int cmd_measures(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream&) {
  check_common(cfg);
  ordered_json j;
  ordered_json atk = ordered_json::object();
  if (!cfg.dist.empty()) {
    const FamilySpec spec = io::parse_family_spec(cfg.dist);
    j["spec"] = spec.to_string();
    j["nulls"] = ordered_json::object();
    try {
      const GiniValue g = gini_closed(spec);
      j["gini_closed"] = g.value;
      j["gini_closed_method"] = std::string(gini_method_name(g.method));
    } catch (const GiniSeriesNotConverged&) {
      j["gini_closed"] = nullptr;
      j["nulls"]["gini_closed"] = "series_not_converged";
    } catch (const ExistenceError&) {
      j["gini_closed"] = nullptr;
      j["nulls"]["gini_closed"] = "mean_undefined";
    }
    const McConfig mc{cfg.mc_n, cfg.seed};
    try {
      const GiniValue g = gini_mc(spec, mc);
      j["gini_mc"] = g.value;
      j["gini_mc_se"] = *g.mc_std_error;
    } catch (const ExistenceError&) {
      j["gini_mc"] = nullptr;
      j["gini_mc_se"] = nullptr;
      j["nulls"]["gini_mc"] = "mean_undefined";
      j["nulls"]["gini_mc_se"] = "mean_undefined";
    }
    for (double e : cfg.epsilons) {
      try {
        atk[eps_key(e)] = atkinson_mc(spec, e, mc);
      } catch (const ExistenceError&) {
        atk[eps_key(e)] = nullptr;
        j["nulls"]["atkinson." + eps_key(e)] = "moment_undefined";
      }
    }
    j["atkinson"] = atk;
    j["mc_n"] = cfg.mc_n;
    j["seed"] = cfg.seed;
  } else {
    const auto hd = io::read_microdata(in);
    const SampleMeasures sm = sample_measures(hd.micro, cfg.epsilons);
    j["n"] = hd.micro.size();
    j["mean"] = sm.mean;
    j["gini"] = sm.gini;
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) atk[eps_key(cfg.epsilons[i])] = sm.atkinson[i];
    j["atkinson"] = atk;
  }
  if (cfg.format == "csv") {
    out << "measure,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "atkinson") {
        for (auto a = it->begin(); a != it->end(); ++a) out << "atkinson_" << a.key() << ',' << cell(*a) << '\n';
      } else if (it.key() != "nulls") {
        out << it.key() << ',' << cell(*it) << '\n';
      }
    }
  } else {
    out << j.dump() << '\n';
  }
  return kOk;
}

int cmd_report(const RunConfig& cfg, std::istream& in, std::ostream& out, std::ostream& log) {
  check_common(cfg);
  std::vector<ordered_json> rows;
  std::string line;
  std::size_t lineno = 0;
  int status = kOk;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(ordered_json::parse(line));
    } catch (const std::exception& e) {
      log << "warning: line " << lineno << ": " << e.what() << '\n';
      status = kRecordErrors;
    }
  }
  if (rows.empty()) log << "warning: no fit records in input; tables are empty\n";

  std::vector<ErrorObservation> obs;
  std::vector<std::string> ids, models;
  std::map<std::string, bool> lb_seen;
  // (method, id, family) -> scores
  std::map<std::string, std::map<std::string, std::map<std::string, GofScores>>> scores;
  for (const auto& r : rows) {
    if (!r.contains("id") || !r.contains("status")) continue;
    const std::string id = cell(r["id"]);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    const bool has_survey = r.contains("survey_gini") && r["survey_gini"].is_number();
    if (has_survey && r.contains("lower_bound_gini") && !lb_seen[id]) {
      lb_seen[id] = true;
      obs.push_back({"lower_bound", r["lower_bound_gini"].get<double>(), r["survey_gini"].get<double>()});
    }
    if (r["status"] != "ok") continue;
    const std::string fam = cell(r["family"]), method = cell(r["method"]);
    if (std::find(models.begin(), models.end(), fam) == models.end()) models.push_back(fam);
    if (has_survey && r["gini"].is_number()) {
      obs.push_back({fam + "_" + method, r["gini"].get<double>(), r["survey_gini"].get<double>()});
    }
    GofScores g;
    g.aic = r["aic"].get<double>();
    g.bic = r["bic"].get<double>();
    g.rss = r.contains("rss") ? r["rss"].get<double>() : 0.0;
    if (r["wssr"].is_number()) g.wssr = r["wssr"].get<double>();
    scores[method][id][fam] = g;
  }
  const auto errors = error_report(obs);

  ordered_json rep;
  rep["datasets"] = ids.size();
  ordered_json bins = ordered_json::array();
  for (const auto& m : errors) {
    ordered_json b;
    b["method"] = m.method;
    b["count"] = m.count;
    b["mean_abs_error"] = m.mean_abs_error;
    b["mean_rel_error"] = m.mean_rel_error;
    for (std::size_t k = 0; k < kErrorBins; ++k) {
      b["absolute"][std::string(absolute_bin_label(k))] = m.absolute[k];
      b["relative"][std::string(relative_bin_label(k))] = m.relative[k];
    }
    bins.push_back(b);
  }
  rep["error_bins"] = bins;
  ordered_json dom = ordered_json::array();
  for (const auto& [method, by_id] : scores) {
    for (Criterion c : {Criterion::AIC, Criterion::BIC, Criterion::WSSR}) {
      std::vector<std::vector<std::optional<GofScores>>> table;
      for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) continue;
        std::vector<std::optional<GofScores>> row(models.size());
        for (std::size_t k = 0; k < models.size(); ++k) {
          const auto f = it->second.find(models[k]);
          if (f != it->second.end()) row[k] = f->second;
        }
        table.push_back(std::move(row));
      }
      ordered_json d;
      d["method"] = method;
      d["criterion"] = std::string(criterion_name(c));
      d["models"] = models;
      d["matrix"] = dominance_matrix(table, c);
      dom.push_back(d);
    }
  }
  rep["dominance"] = dom;

  if (cfg.format == "csv") {
    out << "table,method,key,column,value\n";
    for (const auto& b : rep["error_bins"]) {
      const std::string m = b["method"];
      out << "error_bins," << m << ",count,," << b["count"].dump() << '\n';
      out << "error_bins," << m << ",mean_abs_error,," << cell(b["mean_abs_error"]) << '\n';
      out << "error_bins," << m << ",mean_rel_error,," << cell(b["mean_rel_error"]) << '\n';
      for (auto it = b["absolute"].begin(); it != b["absolute"].end(); ++it)
        out << "error_bins," << m << ",absolute," << it.key() << ',' << it->dump() << '\n';
      for (auto it = b["relative"].begin(); it != b["relative"].end(); ++it)
        out << "error_bins," << m << ",relative," << it.key() << ',' << it->dump() << '\n';
    }
    for (const auto& d : rep["dominance"]) {
      const auto& ms = d["models"];
      for (std::size_t r = 0; r < ms.size(); ++r)
        for (std::size_t c = 0; c < ms.size(); ++c)
          out << "dominance_" << cell(d["criterion"]) << ',' << cell(d["method"]) << ',' << cell(ms[r]) << ','
              << cell(ms[c]) << ',' << cell(d["matrix"][r][c]) << '\n';
    }
  } else {
    out << rep.dump(2) << '\n';
  }
  return status;
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    std::ifstream fin;
    std::istream* in = &std::cin;
    const bool needs_input = cfg.command != "simulate" && !(cfg.command == "measures" && !cfg.dist.empty());
    if (needs_input && cfg.input != "-") {
      fin.open(cfg.input);
      if (!fin) {
        log << "error: cannot read " << cfg.input << '\n';
        return kFatal;
      }
      in = &fin;
    }
    std::ofstream fout;
    std::ostream* out = &std::cout;
    if (cfg.output != "-") {
      fout.open(cfg.output);
      if (!fout) {
        log << "error: cannot write " << cfg.output << '\n';
        return kFatal;
      }
      out = &fout;
    }
    if (cfg.command == "fit") return cmd_fit(cfg, *in, *out, log);
    if (cfg.command == "simulate") return cmd_simulate(cfg, *out, log);
    if (cfg.command == "group") return cmd_group(cfg, *in, *out, log);
    if (cfg.command == "measures") return cmd_measures(cfg, *in, *out, log);
    if (cfg.command == "report") return cmd_report(cfg, *in, *out, log);
    log << "error: unknown command '" << cfg.command << "'\n";
    return kFatal;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFatal;
  }
}

}  // namespace lorenzfit::cli
