#include "eigenshift/cli_reporting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eigenshift/bounds.hpp"
#include "eigenshift/contour.hpp"
#include "eigenshift/ensembles.hpp"
#include "eigenshift/errors.hpp"
#include "eigenshift/experiments.hpp"
#include "eigenshift/matrix_io.hpp"
#include "eigenshift/rng.hpp"
#include "eigenshift/selection.hpp"
#include "eigenshift/spectral.hpp"

namespace eigenshift {

namespace {

const std::map<std::string, std::vector<std::string>>& flag_table() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"bounds",
       {"--matrix", "--noise", "--S", "--lambda-bar", "--mode", "--tol",
        "--out"}},
      {"quantities", {"--matrix", "--noise", "--S", "--lambda-bar", "--out"}},
      {"contour-check", {"--s", "--trials", "--seed", "--tol", "--out"}},
      {"ensemble", {"--spec", "--seed", "--out"}},
      {"experiment", {"--config", "--out", "--seed", "--threads"}},
  };
  return table;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  return buf;
}

void row(std::ostream& os, const std::string& key, const std::string& value) {
  os << key;
  for (std::size_t i = key.size(); i < 26; ++i) os << ' ';
  os << ' ' << value << '\n';
}

void row(std::ostream& os, const std::string& key, double value) {
  row(os, key, fmt(value));
}

const std::string* find_opt(const Invocation& inv, const char* key) {
  auto it = inv.options.find(key);
  return it == inv.options.end() ? nullptr : &it->second;
}

const std::string& need_opt(const Invocation& inv, const char* key) {
  const std::string* v = find_opt(inv, key);
  if (v == nullptr)
    throw UsageError(inv.subcommand + " needs --" + key);
  return *v;
}

double to_double(const std::string& v, const char* flag) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("not a number: ") + flag + "=" + v);
}

long long to_ll(const std::string& v, const char* flag) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("not an integer: ") + flag + "=" + v);
}

std::uint64_t to_u64(const std::string& v, const char* flag) {
  try {
    std::size_t pos = 0;
    const std::uint64_t n = std::stoull(v, &pos);
    if (pos == v.size() && v[0] != '-') return n;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("not a nonnegative integer: ") + flag + "=" +
                   v);
}

// Comma-separated 1-based indices, returned 0-based sorted unique.
std::vector<int> parse_index_set(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    long long idx = 0;
    try {
      std::size_t pos = 0;
      idx = std::stoll(tok, &pos);
      if (pos != tok.size()) idx = 0;
    } catch (const std::exception&) {
      idx = 0;
    }
    if (idx < 1)
      throw UsageError("--S entries are 1-based positive integers: got '" +
                       tok + "'");
    out.push_back(static_cast<int>(idx) - 1);
  }
  if (out.empty()) throw UsageError("--S is empty");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string join_one_based(const std::vector<int>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(idx[i] + 1);
  }
  return s;
}

// --seed wins; otherwise a fresh seed is generated (and later printed).
std::uint64_t pick_seed(const Invocation& inv) {
  if (const std::string* v = find_opt(inv, "seed")) return to_u64(*v, "--seed");
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw Error("failed writing output file: " + path);
}

struct BoundsSetup {
  Eigen::MatrixXd A;
  Eigen::MatrixXd E;  // symmetrized
  Spectrum spec;
  Selection sel;
  GapReport gaps;
  SkewnessReport sk;
  std::vector<int> S;
  double lambda_bar = 0.0;
};

// Shared by bounds and quantities: load the pair, select, and measure the
// skew quantities. The default radius min(|lambda_p|, delta_S)/2 keeps the
// neighborhood at exactly S; widening it is an explicit --lambda-bar choice
// because the selection boundary is inclusive.
BoundsSetup load_bounds_setup(const Invocation& inv) {
  BoundsSetup b;
  b.A = SymMatrix(load_matrix_json(need_opt(inv, "matrix"))).mat();
  b.E = SymMatrix(load_matrix_json(need_opt(inv, "noise"))).mat();
  if (b.A.rows() != b.E.rows())
    throw UsageError("--matrix and --noise dimensions differ");
  b.S = parse_index_set(need_opt(inv, "S"));
  b.spec = decompose_symmetric(SymMatrix(b.A));
  const GapReport coarse =
      spectral_gaps(b.spec, b.S, static_cast<int>(b.S.size()));
  if (const std::string* v = find_opt(inv, "lambda-bar")) {
    b.lambda_bar = to_double(*v, "--lambda-bar");
  } else {
    double smallest = std::numeric_limits<double>::infinity();
    for (int i : b.S)
      smallest = std::min(smallest, std::abs(b.spec.eigenvalues(i)));
    b.lambda_bar = std::min(smallest, coarse.delta_S) / 2.0;
    if (!(b.lambda_bar > 0.0))
      throw UsageError(
          "cannot derive a neighborhood radius for this selection; pass "
          "--lambda-bar");
  }
  b.sel = select_neighborhood(b.spec, b.S, b.lambda_bar);
  b.gaps = spectral_gaps(b.spec, b.S, b.sel.p);
  b.sk = skew_xyw(b.spec, b.E, b.sel);
  b.sk.E_norm = operator_norm(b.E);
  return b;
}

EigenspaceMode pick_mode(const Invocation& inv, const std::vector<int>& S) {
  if (const std::string* v = find_opt(inv, "mode")) {
    if (*v == "leading_p") return EigenspaceMode::leading_p;
    if (*v == "singular_p") return EigenspaceMode::singular_p;
    if (*v == "general_S") return EigenspaceMode::general_S;
    throw UsageError("unknown --mode: " + *v +
                     " (expected leading_p, singular_p, or general_S)");
  }
  for (std::size_t i = 0; i < S.size(); ++i)
    if (S[i] != static_cast<int>(i)) return EigenspaceMode::general_S;
  return EigenspaceMode::leading_p;
}

const char* mode_name(EigenspaceMode mode) {
  switch (mode) {
    case EigenspaceMode::leading_p: return "leading_p";
    case EigenspaceMode::singular_p: return "singular_p";
    case EigenspaceMode::general_S: return "general_S";
  }
  return "?";
}

int run_bounds(const Invocation& inv, std::ostream& table) {
  BoundsSetup b = load_bounds_setup(inv);
  const double slack =
      find_opt(inv, "tol") ? to_double(*find_opt(inv, "tol"), "--tol") : 1e-9;
  if (!(slack > 0.0)) throw UsageError("--tol must be positive");

  const EigenspaceMode mode = pick_mode(inv, b.S);
  const BoundReport br = eigenspace_bound(mode, b.sk, b.sel, b.gaps);
  const ClassicalBounds cb = classical_bounds(b.sk.E_norm, b.gaps.delta_S);

  const Spectrum tilde = decompose_symmetric(SymMatrix(b.A + b.E));
  const double measured = subspace_distance(spectral_projector(b.spec, b.S),
                                            spectral_projector(tilde, b.S));
  double shift = 0.0;
  for (int i = 0; i < b.spec.eigenvalues.size(); ++i)
    shift = std::max(shift, std::abs(b.spec.eigenvalues(i) -
                                     tilde.eigenvalues(i)));

  // A check fails only when a bound whose hypotheses hold is exceeded.
  const auto violated = [slack](double value, double bound) {
    return std::isfinite(bound) && value > bound * (1.0 + slack) + 1e-12;
  };
  int violations = 0;
  if (violated(shift, cb.weyl)) ++violations;
  if (violated(measured, cb.davis_kahan)) ++violations;
  if (br.valid && violated(measured, br.value)) ++violations;

  row(table, "subcommand", std::string("bounds"));
  row(table, "mode", std::string(mode_name(mode)));
  row(table, "n", static_cast<double>(b.spec.source_dim));
  row(table, "S (1-based)", join_one_based(b.S));
  row(table, "p", static_cast<double>(b.sel.p));
  row(table, "r", static_cast<double>(b.sel.r));
  row(table, "lambda_bar", b.lambda_bar);
  row(table, "delta_S", b.gaps.delta_S);
  row(table, "E_norm", b.sk.E_norm);
  row(table, "measured_distance", measured);
  row(table, "eigenvalue_shift", shift);
  row(table, "weyl", cb.weyl);
  row(table, "davis_kahan", cb.davis_kahan);
  row(table, "bound", br.value);
  row(table, "bound_valid", std::string(br.valid ? "yes" : "no"));
  if (br.assumption) {
    row(table, "assumption",
        assumption_kind_name(br.assumption->kind));
    row(table, "assumption_max_ratio", br.assumption->max_ratio);
  }
  for (const auto& [name, value] : br.terms) row(table, "  " + name, value);
  row(table, "violations", static_cast<double>(violations));

  if (const std::string* out = find_opt(inv, "out")) {
    nlohmann::json j;
    j["mode"] = mode_name(mode);
    j["S"] = b.S;
    j["lambda_bar"] = b.lambda_bar;
    j["measured_distance"] = measured;
    j["eigenvalue_shift"] = shift;
    j["weyl"] = cb.weyl;
    j["davis_kahan"] = cb.davis_kahan;
    j["bound"] = bound_report_to_json(br);
    j["skew"] = skew_to_json(b.sk, b.sel, b.gaps.delta_S);
    j["violations"] = violations;
    write_json_file(*out, j);
  }
  return violations == 0 ? 0 : 1;
}

int run_quantities(const Invocation& inv, std::ostream& table) {
  BoundsSetup b = load_bounds_setup(inv);
  const SkewnessReport aux = skew_aux(b.spec, b.E, b.sel, b.sel.p);
  b.sk.xbar = aux.xbar;
  b.sk.ybar = aux.ybar;
  b.sk.sigma = aux.sigma;

  row(table, "subcommand", std::string("quantities"));
  row(table, "n", static_cast<double>(b.spec.source_dim));
  row(table, "S (1-based)", join_one_based(b.S));
  row(table, "N (1-based)", join_one_based(b.sel.N));
  row(table, "p", static_cast<double>(b.sel.p));
  row(table, "r", static_cast<double>(b.sel.r));
  row(table, "lambda_bar", b.lambda_bar);
  for (int i : b.S)
    row(table, "lambda[" + std::to_string(i + 1) + "]",
        b.spec.eigenvalues(i));
  row(table, "delta_S", b.gaps.delta_S);
  row(table, "delta_p", b.gaps.delta_p);
  row(table, "delta_p_two_sided", b.gaps.delta_p_two_sided);
  row(table, "delta_bar_p", b.gaps.delta_bar_p);
  row(table, "x", b.sk.x);
  row(table, "y", b.sk.y);
  row(table, "w", b.sk.w);
  row(table, "xbar", b.sk.xbar);
  row(table, "ybar", b.sk.ybar);
  row(table, "sigma", b.sk.sigma);
  row(table, "E_norm", b.sk.E_norm);

  if (const std::string* out = find_opt(inv, "out"))
    write_json_file(*out, skew_to_json(b.sk, b.sel, b.gaps.delta_S));
  return 0;
}

int run_contour_check(const Invocation& inv, std::ostream& table) {
  const std::string* sv = find_opt(inv, "s");
  const int s = sv ? static_cast<int>(to_ll(*sv, "--s")) : 6;
  if (s < 1 || s > 9)
    throw UsageError("--s must be between 1 and 9: got " +
                     std::to_string(s));
  const std::string* tv = find_opt(inv, "trials");
  const int trials = tv ? static_cast<int>(to_ll(*tv, "--trials")) : 100;
  if (trials < 1) throw UsageError("--trials must be at least 1");
  const double tol =
      find_opt(inv, "tol") ? to_double(*find_opt(inv, "tol"), "--tol") : 1e-8;
  if (!(tol > 0.0)) throw UsageError("--tol must be positive");
  const std::uint64_t seed = pick_seed(inv);

  int failures = 0;
  double max_dev = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int T = 1 + t % s;
    // s+1 distinct poles with every neighbouring gap at least 0.05, and a
    // contiguous run of T of them enclosed so a separating contour exists.
    RngStream rv(seed, 2 * static_cast<std::uint64_t>(t));
    std::vector<double> vals(static_cast<std::size_t>(s) + 1);
    double cur = rv.unit(0);
    for (int i = 0; i <= s; ++i) {
      vals[static_cast<std::size_t>(i)] = cur;
      cur += 0.05 + rv.unit(static_cast<std::uint64_t>(i) + 1);
    }
    RngStream rs(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    const int start = static_cast<int>(
        rs.bits(0) % static_cast<std::uint64_t>(s + 2 - T));
    std::vector<double> in, out_vals;
    std::vector<bool> flags;
    for (int i = 0; i <= s; ++i) {
      const bool enclosed = (i >= start && i < start + T);
      flags.push_back(enclosed);
      (enclosed ? in : out_vals).push_back(vals[static_cast<std::size_t>(i)]);
    }
    const double comb = integral_combinatorial(in, out_vals);
    const auto num =
        integral_numeric(vals, flags, std::min(tol * 1e-3, 1e-11));
    const double dev =
        std::abs(comb - num.real()) / std::max(1.0, std::abs(comb));
    max_dev = std::max(max_dev, dev);
    if (dev > tol) ++failures;
  }

  row(table, "subcommand", std::string("contour-check"));
  row(table, "s", static_cast<double>(s));
  row(table, "trials", static_cast<double>(trials));
  row(table, "seed", fmt(seed));
  row(table, "tol", tol);
  row(table, "max_deviation", max_dev);
  row(table, "failures", static_cast<double>(failures));
  row(table, "pass", std::string(failures == 0 ? "yes" : "no"));

  if (const std::string* out = find_opt(inv, "out")) {
    nlohmann::json j;
    j["s"] = s;
    j["trials"] = trials;
    j["seed"] = seed;
    j["tol"] = tol;
    j["max_deviation"] = max_dev;
    j["failures"] = failures;
    j["pass"] = (failures == 0);
    write_json_file(*out, j);
  }
  return failures == 0 ? 0 : 1;
}

int run_ensemble(const Invocation& inv, std::ostream& table) {
  const nlohmann::json sj_in = load_json_file(need_opt(inv, "spec"));
  EnsembleSpec spec = ensemble_spec_from_json(sj_in);
  // --seed wins; with no seed anywhere a fresh one is generated and printed.
  if (find_opt(inv, "seed") || !sj_in.contains("seed"))
    spec.seed = pick_seed(inv);
  const SymMatrix M = gen_symmetric_noise(spec);
  const double norm = operator_norm(M.mat());
  const nlohmann::json sj = ensemble_spec_to_json(spec);

  row(table, "subcommand", std::string("ensemble"));
  row(table, "kind", sj["kind"].get<std::string>());
  row(table, "n", static_cast<double>(spec.n));
  row(table, "entry_dist", sj["entry_dist"].get<std::string>());
  row(table, "seed", fmt(spec.seed));
  row(table, "operator_norm", norm);
  row(table, "norm_over_sqrt_n", norm / std::sqrt(static_cast<double>(spec.n)));

  if (const std::string* out = find_opt(inv, "out"))
    save_matrix_json(*out, M.mat());
  return 0;
}

int run_experiment_cmd(const Invocation& inv, std::ostream& table) {
  const nlohmann::json cj = load_json_file(need_opt(inv, "config"));
  ExperimentConfig cfg = experiment_config_from_json(cj);
  if (find_opt(inv, "seed") || !cj.contains("seed"))
    cfg.seed = pick_seed(inv);
  if (const std::string* v = find_opt(inv, "threads")) {
    const long long t = to_ll(*v, "--threads");
    if (t < 0) throw UsageError("--threads must be nonnegative");
    cfg.threads = static_cast<int>(t);
  }
  const ExperimentResult res = run_experiment(cfg);

  row(table, "subcommand", std::string("experiment"));
  row(table, "kind", experiment_kind_name(cfg.kind));
  row(table, "trials", static_cast<double>(cfg.trials));
  row(table, "seed", fmt(cfg.seed));
  row(table, "valid_fraction", res.summary.valid_fraction);
  row(table, "mean_measured", res.summary.mean_measured);
  row(table, "mean_ratio", res.summary.mean_ratio);
  row(table, "median_ratio", res.summary.median_ratio);
  row(table, "min_ratio", res.summary.min_ratio);
  row(table, "max_ratio", res.summary.max_ratio);
  row(table, "q10_ratio", res.summary.q10_ratio);
  row(table, "q90_ratio", res.summary.q90_ratio);
  row(table, "pass", std::string(res.pass ? "yes" : "no"));

  if (const std::string* out = find_opt(inv, "out")) {
    std::error_code ec;
    std::filesystem::create_directories(*out, ec);
    if (ec) throw Error("cannot create output directory: " + *out);
    const std::filesystem::path dir(*out);
    emit_report(res, "json", (dir / "result.json").string());
    emit_report(res, "csv", (dir / "result.csv").string());
  }
  return res.pass ? 0 : 1;
}

}  // namespace

Invocation parse_invocation(const std::vector<std::string>& args) {
  if (args.empty())
    throw UsageError(
        "missing subcommand; expected one of bounds, quantities, "
        "contour-check, ensemble, experiment");
  Invocation inv;
  inv.subcommand = args[0];
  const auto entry = flag_table().find(inv.subcommand);
  if (entry == flag_table().end())
    throw UsageError("unknown subcommand: " + inv.subcommand);

  std::size_t i = 1;
  if (inv.subcommand == "experiment" && i < args.size() && args[i] == "run")
    ++i;  // optional verb; running is all the subcommand does
  for (; i < args.size(); ++i) {
    const std::string& flag = args[i];
    if (flag.rfind("--", 0) != 0)
      throw UsageError("unexpected argument: " + flag);
    if (std::find(entry->second.begin(), entry->second.end(), flag) ==
        entry->second.end())
      throw UsageError("unknown flag for " + inv.subcommand + ": " + flag);
    if (i + 1 >= args.size())
      throw UsageError("flag needs a value: " + flag);
    const std::string key = flag.substr(2);
    if (inv.options.count(key) != 0)
      throw UsageError("flag given twice: " + flag);
    inv.options[key] = args[++i];
  }
  if (const std::string* v = find_opt(inv, "spec")) inv.config_path = *v;
  if (const std::string* v = find_opt(inv, "config")) inv.config_path = *v;
  return inv;
}

int run(const Invocation& inv, std::ostream& table) {
  try {
    if (inv.subcommand == "bounds") return run_bounds(inv, table);
    if (inv.subcommand == "quantities") return run_quantities(inv, table);
    if (inv.subcommand == "contour-check")
      return run_contour_check(inv, table);
    if (inv.subcommand == "ensemble") return run_ensemble(inv, table);
    if (inv.subcommand == "experiment")
      return run_experiment_cmd(inv, table);
    throw UsageError("unknown subcommand: " + inv.subcommand);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

std::string usage_text() {
  return
      "eigenshift - perturbation bounds and spectral diagnostics\n"
      "\n"
      "usage: eigenshift <subcommand> [flags]\n"
      "\n"
      "Index sets on the command line are 1-based: --S 1,2 selects the two\n"
      "largest eigenvalues.\n"
      "\n"
      "subcommands\n"
      "  bounds         compare measured subspace rotation against the\n"
      "                 classical and skew-aware bounds\n"
      "                 --matrix a.json --noise e.json --S 1,2\n"
      "                 [--lambda-bar R] [--mode leading_p|singular_p|\n"
      "                 general_S] [--tol T] [--out f.json]\n"
      "  quantities     report x, y, w and the gap geometry for a selection\n"
      "                 --matrix a.json --noise e.json --S 1,2\n"
      "                 [--lambda-bar R] [--out f.json]\n"
      "  contour-check  compare the combinatorial contour sum against\n"
      "                 numeric integration on seeded pole configurations\n"
      "                 [--s 6] [--trials 100] [--seed S] [--tol 1e-8]\n"
      "                 [--out f.json]\n"
      "  ensemble       generate a random matrix and report its norm\n"
      "                 --spec spec.json [--seed S] [--out m.json]\n"
      "  experiment     run a seeded experiment from a config file\n"
      "                 [run] --config cfg.json [--seed S] [--threads K]\n"
      "                 [--out dir/]  (writes result.json and result.csv)\n"
      "\n"
      "exit codes: 0 pass, 1 check failed, 2 usage or I/O error.\n"
      "\n"
      "Every run that draws randomness prints its seed, so passing that\n"
      "seed back through --seed replays the run exactly. --threads (or the\n"
      "EIGENSHIFT_THREADS environment variable) only sets worker count;\n"
      "results are identical at any thread count.\n";
}

}  // namespace eigenshift
