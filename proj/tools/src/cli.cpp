// Copyright 2026 The qndsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qnd_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qnd/cnot_qnd.hpp"
#include "qnd/error.hpp"
#include "qnd/metrics.hpp"
#include "qnd/photonics.hpp"
#include "qnd/weakval.hpp"

#ifndef QNDSIM_VERSION
#define QNDSIM_VERSION "0.0.0"
#endif

namespace qnd::cli {

using nlohmann::json;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// ---------------------------------------------------------------------------
// Typed access to config fields; every failure names the field.

double number(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_number()) throw Error(std::string(key) + " must be a number", key);
  return cfg[key].get<double>();
}

std::uint64_t count(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_number_integer() || cfg[key].get<std::int64_t>() < 0)
    throw Error(std::string(key) + " must be a nonnegative integer", key);
  return cfg[key].get<std::uint64_t>();
}

std::string text(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_string()) throw Error(std::string(key) + " must be a string", key);
  return cfg[key].get<std::string>();
}

bool flag(const json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_boolean()) throw Error(std::string(key) + " must be true or false", key);
  return cfg[key].get<bool>();
}

bool present(const json& cfg, const char* key) { return cfg.contains(key) && !cfg[key].is_null(); }

std::vector<double> numbers(const json& cfg, const char* key) {
  const auto& v = cfg.at(key);
  if (!v.is_array() || v.empty()) throw Error(std::string(key) + " must be a nonempty list of numbers", key);
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw Error(std::string(key) + " must be a nonempty list of numbers", key);
    out.push_back(x.get<double>());
  }
  return out;
}

json read_json_file(const std::string& path, const char* field) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path, field);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path + ": " + e.what(), field);
  }
}

void check_choice(const json& cfg, const char* key, std::initializer_list<const char*> allowed) {
  const auto v = text(cfg, key);
  for (const char* a : allowed)
    if (v == a) return;
  throw Error("unsupported " + std::string(key) + " '" + v + "'", key);
}

std::string fmt12(double x) {
  char b[64];
  std::snprintf(b, sizeof b, "%.12g", x);
  return b;
}

// ---------------------------------------------------------------------------
// fidelity

ProbDist distribution(const json& cfg, const char* key) {
  const auto v = numbers(cfg, key);
  try {
    return flag(cfg, "counts") ? ProbDist::from_counts(v) : ProbDist(v);
  } catch (const Error& e) {
    throw Error(std::string(key) + ": " + e.what(), key);
  }
}

json run_fidelity(const json& cfg) {
  if (!present(cfg, "p_in")) throw Error("p_in is required", "p_in");
  if (!present(cfg, "p_m") && !present(cfg, "p_out")) throw Error("need p_m or p_out", "p_m");
  const auto p_in = distribution(cfg, "p_in");
  json r{{"f_m", nullptr}, {"f_qnd", nullptr}, {"f_qsp", nullptr}};
  if (present(cfg, "p_m")) {
    const auto p_m = distribution(cfg, "p_m");
    r["f_m"] = measurement_fidelity(p_in, p_m);
    if (present(cfg, "conditional")) r["f_qsp"] = qsp_fidelity(p_m, numbers(cfg, "conditional"));
  }
  if (present(cfg, "p_out")) r["f_qnd"] = qnd_fidelity(p_in, distribution(cfg, "p_out"));
  return r;
}

// ---------------------------------------------------------------------------
// cnot-sweep

BasisSpec basis_named(const std::string& name) {
  if (name == "z") return BasisSpec::computational(2);
  if (name == "x") return BasisSpec::pauli_x();
  if (name == "y") return BasisSpec::pauli_y();
  throw Error("unsupported basis '" + name + "'", "basis");
}

std::vector<double> sweep_gammas(const json& cfg) {
  if (present(cfg, "gammas")) return numbers(cfg, "gammas");
  const auto points = count(cfg, "points");
  if (points == 0) throw Error("points must be at least 1", "points");
  return cnot::gamma_grid(points);
}

json run_sweep(const json& cfg) {
  check_choice(cfg, "ensemble", {"pauli", "eigen"});
  const auto basis = basis_named(text(cfg, "basis"));
  const auto gammas = sweep_gammas(cfg);
  const auto ensemble = text(cfg, "ensemble") == "pauli" ? cnot::pauli_ensemble(basis) : cnot::eigen_ensemble(basis);
  const auto rows = cnot::strength_sweep(gammas, basis, ensemble);
  return json{{"rows", rows}, {"csv_header", cnot::kSweepCsvHeader}};
}

// ---------------------------------------------------------------------------
// optics

json run_optics(const json& cfg) {
  const double eta = number(cfg, "eta");
  const double alpha = number(cfg, "alpha"), beta = number(cfg, "beta");
  const bool loss = flag(cfg, "loss");
  const bool variable = present(cfg, "strength_a");
  if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-10) throw Error("alpha^2 + beta^2 must be 1", "alpha");
  const auto signal = PureState::qubit(alpha, beta);
  const auto meter = variable ? optics::meter_prep_strength(number(cfg, "strength_a")) : optics::meter_prep(eta);

  const auto gate = optics::run_gate(signal, meter, eta, loss);
  json r{{"success_prob", gate.success_prob},
         {"coincidence", gate},
         {"characterization", optics::characterize_gate(meter, eta, loss)},
         {"circuit", optics::build_qnd_circuit(eta, loss)}};
  // The closed form holds for the standard meter at eta = 1/3.
  if (!variable && std::abs(eta - 1.0 / 3.0) < 1e-9)
    r["analytic_success"] = optics::analytic_success(alpha, beta, loss);
  else
    r["analytic_success"] = nullptr;
  return r;
}

// ---------------------------------------------------------------------------
// weak

weak::PostSelect post_named(const std::string& s) {
  if (s == "plus") return weak::PostSelect::plus;
  if (s == "minus") return weak::PostSelect::minus;
  throw Error("post must be plus or minus", "post");
}

json run_weak(const json& cfg) {
  const double alpha = number(cfg, "alpha");
  if (flag(cfg, "bound")) return json{{"gamma_max", weak::negativity_gamma_bound(alpha)}};

  const double beta = number(cfg, "beta");
  const double gamma = number(cfg, "gamma");
  const auto post = post_named(text(cfg, "post"));
  check_choice(cfg, "mode", {"analytic", "sampled"});
  const auto mean = weak::postselected_mean_n(alpha, beta, gamma);
  json r{{"postselected", mean}};
  if (text(cfg, "mode") == "analytic") {
    r["estimate"] = weak::estimate_analytic(alpha, beta, gamma, post);
  } else {
    const auto shots = count(cfg, "shots");
    if (shots == 0) throw Error("sampled mode needs shots > 0", "shots");
    const auto workers = count(cfg, "workers");
    r["estimate"] = weak::estimate_sampled(alpha, beta, gamma, shots, count(cfg, "seed"), post,
                                           static_cast<unsigned>(std::max<std::uint64_t>(1, workers)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Config resolution

json resolve(json cfg) {
  const auto cmd = text(cfg, "command");
  if (cmd == "fidelity" && present(cfg, "counts_file")) {
    const auto file = read_json_file(text(cfg, "counts_file"), "counts_file");
    if (!file.is_object()) throw Error("counts file must hold a JSON object", "counts_file");
    for (const char* k : {"p_in", "p_out", "p_m", "conditional"})
      if (file.contains(k)) cfg[k] = file[k];
    cfg["counts"] = true;
  }
  if (cmd == "optics") {
    if (present(cfg, "signal")) {
      const auto s = text(cfg, "signal");
      const std::map<std::string, std::pair<double, double>> labels{
          {"H", {1.0, 0.0}}, {"V", {0.0, 1.0}}, {"D", {kInvSqrt2, kInvSqrt2}}, {"A", {kInvSqrt2, -kInvSqrt2}}};
      const auto it = labels.find(s);
      if (it == labels.end()) throw Error("signal must be H, V, D or A", "signal");
      cfg["alpha"] = it->second.first;
      cfg["beta"] = it->second.second;
    }
    if (cfg["loss"].is_null()) cfg["loss"] = present(cfg, "strength_a");
  }
  if (cmd == "weak") {
    if (!present(cfg, "beta")) cfg["beta"] = -std::sqrt(std::max(0.0, 1.0 - std::pow(number(cfg, "alpha"), 2)));
    if (present(cfg, "shots") && count(cfg, "shots") > 0 && !flag(cfg, "bound")) {
      if (!present(cfg, "seed")) throw Error("seed is required when shots > 0", "seed");
      cfg["mode"] = "sampled";
    }
  }
  if (present(cfg, "format")) check_choice(cfg, "format", {"json", "csv"});
  return cfg;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    // Lists (circuits, states) stay in the JSON report.
  } else if (j.is_number()) {
    out.emplace_back(prefix, fmt12(j.get<double>()));
  } else if (j.is_boolean()) {
    out.emplace_back(prefix, j.get<bool>() ? "true" : "false");
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, "");
  }
}

void emit(const std::string& text, const json& cfg, std::ostream& out) {
  if (present(cfg, "out")) {
    const auto path = cfg["out"].get<std::string>();
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path, "out");
    f << text;
    if (!f) throw Error("cannot write " + path, "out");
  } else {
    out << text;
  }
}

void error_json(std::ostream& err, const std::string& message, const json& field) {
  err << json{{"error", message}, {"field", field}}.dump() << '\n';
}

}  // namespace

const char* version() { return QNDSIM_VERSION; }

json default_config(const std::string& command) {
  json base{{"command", command}, {"seed", nullptr}, {"format", "json"}, {"out", nullptr}};
  if (command == "fidelity") {
    base.update(json{{"p_in", nullptr},
                     {"p_out", nullptr},
                     {"p_m", nullptr},
                     {"conditional", nullptr},
                     {"counts", false},
                     {"counts_file", nullptr}});
  } else if (command == "cnot-sweep") {
    base.update(json{{"gammas", nullptr}, {"points", 11}, {"basis", "z"}, {"ensemble", "pauli"}});
  } else if (command == "optics") {
    base.update(json{{"signal", "V"},
                     {"alpha", 0.0},
                     {"beta", 1.0},
                     {"eta", 1.0 / 3.0},
                     {"strength_a", nullptr},
                     {"loss", nullptr}});
  } else if (command == "weak") {
    base.update(json{{"alpha", 0.8},
                     {"beta", nullptr},
                     {"gamma", 0.8},
                     {"mode", "analytic"},
                     {"shots", 0},
                     {"post", "plus"},
                     {"bound", false},
                     {"workers", 1}});
  } else {
    throw Error("unknown command '" + command + "'", "command");
  }
  return base;
}

json execute(const json& config) {
  const auto cmd = text(config, "command");
  if (cmd == "fidelity") return run_fidelity(config);
  if (cmd == "cnot-sweep") return run_sweep(config);
  if (cmd == "optics") return run_optics(config);
  if (cmd == "weak") return run_weak(config);
  throw Error("unknown command '" + cmd + "'", "command");
}

std::vector<std::string> check_invariants(const json& config, const json& results) {
  std::vector<std::string> bad;
  auto in_unit = [&](const json& v, const std::string& what) {
    if (v.is_null()) return;
    const double x = v.get<double>();
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) bad.push_back(what + " = " + fmt12(x) + " outside [0, 1]");
  };
  const auto cmd = config.at("command").get<std::string>();
  if (cmd == "fidelity") {
    for (const char* k : {"f_m", "f_qnd", "f_qsp"}) in_unit(results.at(k), k);
  } else if (cmd == "cnot-sweep") {
    for (const auto& row : results.at("rows")) {
      const auto g = fmt12(row.at("gamma").get<double>());
      for (const char* k : {"f_m", "f_qnd", "f_qsp"}) in_unit(row.at(k), std::string(k) + " at gamma " + g);
      if (std::abs(row.at("f_qnd").get<double>() - 1.0) > 1e-10) bad.push_back("p_in != p_out at gamma " + g);
      if (std::abs(row.at("englert").get<double>() - 1.0) > 1e-9) bad.push_back("Englert bound not saturated at gamma " + g);
    }
  } else if (cmd == "optics") {
    const auto& c = results.at("coincidence");
    double total = c.at("success_prob").get<double>();
    for (const auto& [k, v] : c.at("failure_breakdown").items()) total += v.get<double>();
    if (std::abs(total - 1.0) > 1e-10) bad.push_back("outcome probabilities sum to " + fmt12(total));
    in_unit(results.at("success_prob"), "success_prob");
    const auto& lhs = results.at("characterization").at("distinguishability").at("englert_lhs");
    if (lhs.get<double>() > 1.0 + 1e-9) bad.push_back("Englert bound exceeded: " + fmt12(lhs.get<double>()));
  } else if (cmd == "weak") {
    if (results.contains("gamma_max")) {
      const double g = results.at("gamma_max").get<double>();
      if (!(g >= kInvSqrt2 && g <= 1.0)) bad.push_back("gamma_max outside [1/sqrt(2), 1]");
    } else {
      const auto& m = results.at("postselected");
      const double p = m.at("p_plus").get<double>();
      const double beta = config.at("beta").get<double>();
      const double sum = p * m.at("plus_value").get<double>() + (1 - p) * m.at("minus_value").get<double>();
      if (std::abs(sum - beta * beta) > 1e-10) bad.push_back("sum rule broken: " + fmt12(sum));
      if (!m.at("consistent").get<bool>()) bad.push_back("closed form and direct route disagree");
      const auto& e = results.at("estimate");
      const double se = e.at("stderr").get<double>();
      if (e.at("mode") == "analytic" && se != 0.0) bad.push_back("analytic estimate carries a stderr");
      if (!(se >= 0.0) || !std::isfinite(e.at("value").get<double>())) bad.push_back("non-finite estimate");
    }
  }
  return bad;
}

std::string to_csv(const json& config, const json& results) {
  if (config.at("command") == "cnot-sweep") {
    std::vector<cnot::SweepRow> rows;
    for (const auto& r : results.at("rows")) {
      rows.push_back({r.at("gamma").get<double>(), r.at("f_m").get<double>(), r.at("f_qnd").get<double>(),
                      r.at("f_qsp").get<double>(), r.at("k").get<double>(), r.at("k_bar").get<double>(),
                      r.at("englert").get<double>(), r.at("c2_raw").get<double>(),
                      r.at("c2_shortcut").get<double>()});
    }
    return cnot::sweep_to_csv(rows);
  }
  std::vector<std::pair<std::string, std::string>> cells;
  flatten(results, "", cells);
  std::string head, vals;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    head += (i ? "," : "") + cells[i].first;
    vals += (i ? "," : "") + cells[i].second;
  }
  return head + "\n" + vals + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"QND measurement simulator", "qndsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  std::string config_path, out_path, format;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (a previous report also works)");
    sub->add_option("--out", out_path, "write output here instead of stdout");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", seed, "random seed");
  };

  // fidelity
  auto* fid = app.add_subcommand("fidelity", "classical fidelities from distributions or counts");
  std::vector<double> p_in, p_out, p_m, conditional;
  std::string counts_file;
  fid->add_option("--p-in", p_in)->delimiter(',');
  fid->add_option("--p-out", p_out)->delimiter(',');
  fid->add_option("--p-m", p_m)->delimiter(',');
  fid->add_option("--conditional", conditional, "P(signal i | meter i) per outcome")->delimiter(',');
  fid->add_option("--counts-file", counts_file, "JSON object of count lists (p_in, p_m, p_out)");
  fid->add_flag("--counts", "treat inline lists as raw counts");
  common(fid);

  // cnot-sweep
  auto* sweep = app.add_subcommand("cnot-sweep", "CNOT QND characterization over meter strength");
  std::vector<double> gammas;
  std::uint64_t points = 0;
  std::string basis, ensemble;
  sweep->add_option("--gamma", gammas, "meter amplitude(s)")->delimiter(',');
  sweep->add_option("--points", points, "size of the default gamma grid");
  sweep->add_option("--basis", basis)->check(CLI::IsMember({"z", "x", "y"}));
  sweep->add_option("--ensemble", ensemble)->check(CLI::IsMember({"pauli", "eigen"}));
  common(sweep);

  // optics
  auto* opt = app.add_subcommand("optics", "two-photon linear-optical QND gate");
  std::string signal;
  double o_alpha = 0, o_beta = 0, eta = 0, strength_a = 0;
  bool loss = false;
  opt->add_option("--signal", signal)->check(CLI::IsMember({"H", "V", "D", "A"}));
  auto* o_alpha_opt = opt->add_option("--alpha", o_alpha, "signal H amplitude (real)");
  auto* o_beta_opt = opt->add_option("--beta", o_beta, "signal V amplitude (real)");
  opt->add_option("--eta", eta, "reflectivity of the central beamsplitter");
  opt->add_option("--strength-a", strength_a, "variable-strength meter a|H> + sqrt(1-a^2)|V>");
  opt->add_flag("--loss,!--no-loss", loss, "signal-arm loss element (default: on with --strength-a)");
  common(opt);

  // weak
  auto* wk = app.add_subcommand("weak", "post-selected weak values");
  double w_alpha = 0, w_beta = 0, w_gamma = 0;
  std::uint64_t shots = 0, workers = 1;
  std::string post;
  wk->add_option("--alpha", w_alpha);
  wk->add_option("--beta", w_beta);
  wk->add_option("--gamma", w_gamma);
  wk->add_flag("--analytic", "closed-form value");
  wk->add_option("--shots", shots, "Monte-Carlo shots (needs --seed)");
  wk->add_option("--post", post)->check(CLI::IsMember({"plus", "minus"}));
  wk->add_flag("--bound", "largest gamma giving a negative value for this alpha");
  wk->add_option("--workers", workers, "threads for sampling");
  common(wk);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_json(err, e.what(), nullptr);
    return kExitError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  auto set = [&](const char* opt) { return sub->count(opt) > 0; };

  try {
    json cfg = default_config(cmd);
    if (set("--config")) {
      json file = read_json_file(config_path, "config");
      if (file.contains("config") && file["config"].is_object()) file = file["config"];
      if (!file.is_object()) throw Error("config must be a JSON object", "config");
      if (file.contains("command") && file["command"] != cmd)
        throw Error("config is for '" + file["command"].dump() + "', not '" + cmd + "'", "command");
      for (const auto& [k, v] : file.items())
        if (!cfg.contains(k)) throw Error("unknown config key '" + k + "'", k);
      cfg.update(file);
    }
    if (set("--out")) cfg["out"] = out_path;
    if (set("--format")) cfg["format"] = format;
    if (set("--seed")) cfg["seed"] = seed;

    if (cmd == "fidelity") {
      if (set("--p-in")) cfg["p_in"] = p_in;
      if (set("--p-out")) cfg["p_out"] = p_out;
      if (set("--p-m")) cfg["p_m"] = p_m;
      if (set("--conditional")) cfg["conditional"] = conditional;
      if (set("--counts")) cfg["counts"] = true;
      if (set("--counts-file")) cfg["counts_file"] = counts_file;
    } else if (cmd == "cnot-sweep") {
      if (set("--gamma")) cfg["gammas"] = gammas;
      if (set("--points")) {
        cfg["points"] = points;
        cfg["gammas"] = nullptr;
      }
      if (set("--basis")) cfg["basis"] = basis;
      if (set("--ensemble")) cfg["ensemble"] = ensemble;
    } else if (cmd == "optics") {
      if (set("--signal")) cfg["signal"] = signal;
      if (o_alpha_opt->count() || o_beta_opt->count()) {
        cfg["signal"] = nullptr;
        if (o_alpha_opt->count()) cfg["alpha"] = o_alpha;
        if (o_beta_opt->count()) cfg["beta"] = o_beta;
      }
      if (set("--eta")) cfg["eta"] = eta;
      if (set("--strength-a")) cfg["strength_a"] = strength_a;
      if (set("--loss")) cfg["loss"] = loss;
    } else if (cmd == "weak") {
      if (set("--alpha")) {
        cfg["alpha"] = w_alpha;
        if (!set("--beta")) cfg["beta"] = nullptr;
      }
      if (set("--beta")) cfg["beta"] = w_beta;
      if (set("--gamma")) cfg["gamma"] = w_gamma;
      if (set("--analytic")) {
        cfg["mode"] = "analytic";
        cfg["shots"] = 0;
      }
      if (set("--shots")) cfg["shots"] = shots;
      if (set("--post")) cfg["post"] = post;
      if (set("--bound")) cfg["bound"] = true;
      if (set("--workers")) cfg["workers"] = workers;
    }

    cfg = resolve(std::move(cfg));

    const auto t0 = std::chrono::steady_clock::now();
    const json results = execute(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto bad = check_invariants(cfg, results);
    if (!bad.empty()) {
      std::string msg = "invariant violated: " + bad.front();
      if (bad.size() > 1) msg += " (+" + std::to_string(bad.size() - 1) + " more)";
      error_json(err, msg, nullptr);
      return kExitInvariant;
    }

    const json report{{"command", cmd}, {"version", version()}, {"config", cfg}, {"results", results},
                      {"duration_s", secs}};
    if (cfg["format"] == "csv")
      emit(to_csv(cfg, results), cfg, out);
    else
      emit(report.dump(2) + "\n", cfg, out);
    return kExitOk;
  } catch (const Error& e) {
    error_json(err, e.what(), e.field().empty() ? json(nullptr) : json(e.field()));
  } catch (const json::exception& e) {
    error_json(err, std::string("malformed config: ") + e.what(), nullptr);
  } catch (const std::exception& e) {
    error_json(err, e.what(), nullptr);
  }
  return kExitError;
}

}  // namespace qnd::cli
