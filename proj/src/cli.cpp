#include "diagform/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "diagform/census.hpp"
#include "diagform/correlate.hpp"
#include "diagform/dioph.hpp"
#include "diagform/enumerate.hpp"
#include "diagform/errors.hpp"
#include "diagform/format.hpp"
#include "diagform/parallel.hpp"
#include "diagform/sweep.hpp"

namespace diagform {
namespace {

using json = nlohmann::ordered_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not an integer: '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(parse_double(p));
  if (v.empty()) throw UsageError("empty number list");
  return v;
}

std::vector<std::int64_t> parse_ints(const std::string& s) {
  std::vector<std::int64_t> v;
  for (const auto& p : split(s, ',')) v.push_back(parse_int(p));
  if (v.empty()) throw UsageError("empty integer list");
  return v;
}

// "lo:hi,lo:hi,..." ; a single axis is repeated when `repeat` > 1.
Box parse_box(const std::string& s, std::size_t repeat = 1) {
  std::vector<double> lo, hi;
  for (const auto& axis : split(s, ',')) {
    const auto ends = split(axis, ':');
    if (ends.size() != 2) throw UsageError("box axis must look like lo:hi, got '" + axis + "'");
    lo.push_back(parse_double(ends[0]));
    hi.push_back(parse_double(ends[1]));
  }
  if (lo.size() == 1 && repeat > 1) {
    lo.assign(repeat, lo[0]);
    hi.assign(repeat, hi[0]);
  }
  try {
    return Box(lo, hi);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
}

std::string join_doubles(std::span<const double> v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + format_double(v[i]);
  return s;
}

std::string box_text(const Box& b, char sep) {
  std::string s;
  for (std::size_t i = 0; i < b.dimension(); ++i)
    s += (i ? std::string(1, sep) : "") + format_double(b.lo(i)) + ":" + format_double(b.hi(i));
  return s;
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Coefficient options shared by the form-based subcommands.
struct FormOptions {
  int degree = 2;
  std::size_t dimension = 0;
  std::string alpha;
  std::optional<std::uint64_t> alpha_seed;
  std::string domain = "1:2";

  void add(CLI::App* app) {
    app->add_option("--d", degree, "degree d >= 2")->required();
    app->add_option("--k", dimension, "dimension k >= 2")->required();
    app->add_option("--alpha", alpha, "comma-separated coefficients");
    app->add_option("--alpha-seed", alpha_seed, "draw alpha uniformly from --domain with this seed");
    app->add_option("--domain", domain, "coefficient box for --alpha-seed, lo:hi per axis");
  }

  DiagonalForm form() const {
    std::vector<double> a;
    if (!alpha.empty()) {
      if (alpha_seed) throw UsageError("give either --alpha or --alpha-seed, not both");
      a = parse_doubles(alpha);
    } else if (alpha_seed) {
      CounterRng rng(*alpha_seed);
      a = sample_alpha(parse_box(domain, dimension), rng);
    } else {
      throw UsageError("one of --alpha or --alpha-seed is required");
    }
    if (a.size() != dimension) throw UsageError("--alpha has " + std::to_string(a.size()) + " entries, --k is " +
                                                std::to_string(dimension));
    try {
      return DiagonalForm(degree, a);
    } catch (const PreconditionError& e) {
      throw UsageError(e.what());
    }
  }

  void record(json& cfg) const {
    cfg["d"] = degree;
    cfg["k"] = dimension;
    if (!alpha.empty()) cfg["alpha"] = alpha;
    if (alpha_seed) {
      cfg["alpha_seed"] = *alpha_seed;
      cfg["domain"] = domain;
    }
  }
};

// A table of rows with a fixed header, emitted as CSV or JSON.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Columns whose cells are written unquoted in JSON.
  std::vector<bool> numeric;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err, std::vector<std::string> args)
      : out_(out), err_(err), args_(std::move(args)), start_(std::chrono::steady_clock::now()) {}

  std::string format = "csv";
  std::string out_path;

  json manifest(const std::string& command, const json& config, std::optional<std::uint64_t> seed) const {
    json m;
    m["command"] = command;
    m["argv"] = args_;
    m["config"] = config;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["version"] = kVersion;
    m["threads"] = thread_count();
    m["started_at"] = started_;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["outputs"] = outputs_;
    return m;
  }

  void note_output(const std::string& path) { outputs_.push_back(path); }

  // Writes the table to --out (plus a manifest sidecar) or to stdout.
  void emit(const Table& t, const std::string& command, const json& config, std::optional<std::uint64_t> seed) {
    std::ostringstream body;
    if (format == "json") {
      json doc;
      json rows = json::array();
      for (const auto& r : t.rows) {
        json obj;
        for (std::size_t i = 0; i < t.header.size(); ++i) {
          const bool num = i < t.numeric.size() && t.numeric[i];
          if (num && r[i] != "NA") {
            obj[t.header[i]] = json::parse(r[i]);
          } else {
            obj[t.header[i]] = r[i];
          }
        }
        rows.push_back(obj);
      }
      doc["rows"] = rows;
      if (!out_path.empty()) note_output(out_path);
      doc["manifest"] = manifest(command, config, seed);
      body << doc.dump(2) << "\n";
    } else {
      for (std::size_t i = 0; i < t.header.size(); ++i) body << (i ? "," : "") << t.header[i];
      body << "\n";
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) body << (i ? "," : "") << r[i];
        body << "\n";
      }
    }
    write_output(out_path, body.str(), command, config, seed);
  }

  void write_output(const std::string& path, const std::string& text, const std::string& command, const json& config,
                    std::optional<std::uint64_t> seed) {
    if (path.empty()) {
      out_ << text;
      return;
    }
    write_file(path, text);
    note_output(path);
    write_file(path + ".manifest.json", manifest(command, config, seed).dump(2) + "\n");
  }

  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw Error("failed writing " + path);
  }

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::vector<std::string> args_;
  std::chrono::steady_clock::time_point start_;
  std::string started_ = iso_now();
  std::vector<std::string> outputs_;
};

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value statistics and arithmetic census for diagonal forms", "diagform"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Runner run(out, err, args);
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--format", run.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", run.out_path, "output file (stdout when omitted)");
  };

  // correlate
  FormOptions corr_form;
  std::size_t corr_M = 0;
  int corr_ell = 2;
  std::string corr_box;
  std::string corr_seq;
  auto* correlate = app.add_subcommand("correlate", "ell-correlation of one coefficient vector");
  corr_form.add(correlate);
  correlate->add_option("--M", corr_M, "number of leading values")->required();
  correlate->add_option("--ell", corr_ell, "correlation order");
  correlate->add_option("--box", corr_box, "window I, lo:hi per axis")->required();
  add_io(correlate);

  // gaps
  FormOptions gap_form;
  std::size_t gap_M = 0;
  double gap_threshold = 2.006;
  std::string gap_out;
  auto* gaps = app.add_subcommand("gaps", "gap statistics and long-gap scan");
  gap_form.add(gaps);
  gaps->add_option("--M", gap_M, "number of leading values")->required();
  gaps->add_option("--threshold", gap_threshold, "long-gap threshold");
  gaps->add_option("--gaps-out", gap_out, "write the unit-mean gap sequence as CSV (column: gap)");
  add_io(gaps);

  // smooth
  FormOptions sm_form;
  std::int64_t sm_M = 0;
  int sm_ell = 2;
  double sm_w = 1.0;
  std::size_t sm_samples = 1000000;
  std::uint64_t sm_seed = 1;
  auto* smooth = app.add_subcommand("smooth", "smoothed statistic against its Hardy-Littlewood expectation");
  sm_form.add(smooth);
  smooth->add_option("--M", sm_M, "scale M")->required();
  smooth->add_option("--ell", sm_ell, "correlation order");
  smooth->add_option("--w", sm_w, "half width of the window bumps");
  smooth->add_option("--samples", sm_samples, "Monte Carlo draws for the surface constant");
  smooth->add_option("--seed", sm_seed, "Monte Carlo seed");
  add_io(smooth);

  // dioph
  auto* dioph = app.add_subcommand("dioph", "diophantine counting");
  dioph->require_subcommand(1);
  std::string dq_a;
  int dq_d = 2;
  std::int64_t dq_M = 0;
  double dq_H = 0.0;
  bool dq_primitive = false, dq_nonzero = false;
  auto* count_eq = dioph->add_subcommand("count-eq", "solutions of sum a_j x_j^d = 0 with |x_j| <= M");
  count_eq->add_option("--a", dq_a, "comma-separated coefficients")->required();
  count_eq->add_option("--d", dq_d, "degree")->required();
  count_eq->add_option("--M", dq_M, "box radius")->required();
  count_eq->add_flag("--primitive", dq_primitive, "only gcd(x) = 1");
  count_eq->add_flag("--nonzero", dq_nonzero, "only x with every x_j != 0");
  add_io(count_eq);
  auto* count_ineq = dioph->add_subcommand("count-ineq", "solutions of |sum a_j x_j^d| <= H with M <= x_j <= 2M");
  count_ineq->add_option("--a", dq_a, "comma-separated nonzero coefficients")->required();
  count_ineq->add_option("--d", dq_d, "degree")->required();
  count_ineq->add_option("--M", dq_M, "box scale")->required();
  count_ineq->add_option("--H", dq_H, "slack")->required();
  add_io(count_ineq);
  std::int64_t fj_a1 = 1, fj_a2 = 1;
  auto* fejer = dioph->add_subcommand("fejer", "Cauchy-Schwarz chain for mixed four-variable counts");
  fejer->add_option("--a1", fj_a1)->required();
  fejer->add_option("--a2", fj_a2)->required();
  fejer->add_option("--d", dq_d, "degree")->required();
  fejer->add_option("--M", dq_M, "box scale")->required();
  fejer->add_option("--H", dq_H, "slack")->required();
  add_io(fejer);
  std::string ex_kind = "ineq", ex_grid;
  auto* exponent = dioph->add_subcommand("exponent", "log-log growth exponent of a count over an M grid");
  exponent->add_option("--kind", ex_kind, "eq or ineq")->check(CLI::IsMember({"eq", "ineq"}));
  exponent->add_option("--a", dq_a, "comma-separated coefficients")->required();
  exponent->add_option("--d", dq_d, "degree")->required();
  exponent->add_option("--H", dq_H, "slack (ineq)");
  exponent->add_flag("--primitive", dq_primitive, "primitive solutions (eq)");
  exponent->add_option("--grid", ex_grid, "comma-separated increasing M values")->required();
  add_io(exponent);

  // census
  CensusConfig cc;
  std::string cc_mode = "exhaustive";
  std::optional<std::uint64_t> cc_seed;
  std::string cc_D;
  bool cc_halves = false;
  auto* census_cmd = app.add_subcommand("census", "rank and determinant census of d-th power tuple matrices");
  census_cmd->add_option("--ell", cc.rows, "row count (2 ell for the doubled matrix)")->required();
  census_cmd->add_option("--k", cc.cols, "column count")->required();
  census_cmd->add_option("--d", cc.degree, "degree")->required();
  census_cmd->add_option("--M", cc.M, "entries range over [M, 2M]")->required();
  census_cmd->add_option("--mode", cc_mode, "exhaustive or sampled")->check(CLI::IsMember({"exhaustive", "sampled"}));
  census_cmd->add_option("--samples", cc.samples, "sample count (sampled mode)");
  census_cmd->add_option("--seed", cc_seed, "seed (sampled mode)");
  census_cmd->add_option("--D", cc_D, "exact integer threshold on the largest full minor");
  census_cmd->add_flag("--halves", cc_halves, "distinct rows within each half only (doubled matrix)");
  add_io(census_cmd);

  // sweep
  int sw_d = 2;
  std::size_t sw_k = 0;
  std::string sw_domain = "1:2", sw_schedule, sw_box = "0:1", sw_summary;
  std::size_t sw_n = 10;
  std::uint64_t sw_seed = 1;
  int sw_ell = 2;
  std::size_t sw_boot = 1000;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over coefficients of the weak and L2 deviations");
  sweep->add_option("--d", sw_d, "degree")->required();
  sweep->add_option("--k", sw_k, "dimension")->required();
  sweep->add_option("--domain", sw_domain, "coefficient box, lo:hi per axis (one axis repeats)");
  sweep->add_option("--n", sw_n, "alpha samples");
  sweep->add_option("--seed", sw_seed, "seed");
  sweep->add_option("--schedule", sw_schedule, "comma-separated increasing M values")->required();
  sweep->add_option("--ell", sw_ell, "correlation order");
  sweep->add_option("--box", sw_box, "window I, lo:hi per axis");
  sweep->add_option("--bootstrap", sw_boot, "bootstrap resamples");
  sweep->add_option("--summary-out", sw_summary, "summary CSV path");
  add_io(sweep);

  // dump-seq
  FormOptions dump_form;
  std::size_t dump_M = 0;
  std::string dump_out;
  auto* dump = app.add_subcommand("dump-seq", "write the sorted normalized values as a binary DFLB1 file");
  dump_form.add(dump);
  dump->add_option("--M", dump_M, "number of leading values")->required();
  dump->add_option("--out", dump_out, "output path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (correlate->parsed()) {
      const DiagonalForm form = corr_form.form();
      const Box window = parse_box(corr_box);
      if (window.dimension() != static_cast<std::size_t>(corr_ell - 1))
        throw UsageError("--box needs ell - 1 = " + std::to_string(corr_ell - 1) + " axes");
      const auto seq = generate_sequence(form, corr_M);
      const auto res = ell_correlation(seq, {corr_ell, window, corr_M});
      Table t{{"d", "k", "alpha", "M", "ell", "box", "raw_count", "T_ell", "vol_I"}, {},
              {true, true, false, true, true, false, true, true, true}};
      t.add({std::to_string(form.degree()), std::to_string(form.dimension()), join_doubles(form.coefficients(), ';'),
             std::to_string(corr_M), std::to_string(corr_ell), box_text(window, ';'), num(res.raw_count),
             num(res.statistic), num(res.poisson_target)});
      json cfg;
      corr_form.record(cfg);
      cfg["M"] = corr_M;
      cfg["ell"] = corr_ell;
      cfg["box"] = corr_box;
      run.emit(t, "correlate", cfg, corr_form.alpha_seed);
    } else if (gaps->parsed()) {
      const DiagonalForm form = gap_form.form();
      const auto seq = generate_sequence(form, gap_M);
      const auto g = gap_sequence(seq.values);
      const double mean = (seq.values.back() - seq.values.front()) / static_cast<double>(gap_M - 1);
      const auto lg = long_gaps(seq.values, gap_threshold);
      json cfg;
      gap_form.record(cfg);
      cfg["M"] = gap_M;
      cfg["threshold"] = gap_threshold;
      if (!gap_out.empty()) {
        std::ostringstream body;
        body << "gap\n";
        for (double v : g) body << format_double(v / mean) << "\n";
        run.write_output(gap_out, body.str(), "gaps", cfg, gap_form.alpha_seed);
      }
      Table t{{"d", "k", "alpha", "M", "mean_gap", "ks", "threshold", "long_gap_count"}, {},
              {true, true, false, true, true, true, true, true}};
      t.add({std::to_string(form.degree()), std::to_string(form.dimension()), join_doubles(form.coefficients(), ';'),
             std::to_string(gap_M), num(mean), num(ks_against_exponential(g)), num(gap_threshold),
             std::to_string(lg.count)});
      run.emit(t, "gaps", cfg, gap_form.alpha_seed);
    } else if (smooth->parsed()) {
      const DiagonalForm form = sm_form.form();
      const auto kernels = SmoothingKernels::canonical(sm_ell, sm_w);
      const double tstar = smoothed_correlation(form, sm_M, kernels);
      const auto eps = shell_epsilons(form, kernels, sm_samples, sm_seed);
      const auto hl = hl_expectation(form, sm_M, kernels, eps, sm_samples, sm_seed);
      Table t{{"d", "k", "alpha", "M", "ell", "w", "T_star", "hl_expectation", "hl_stderr", "c_alpha",
               "c_alpha_stderr", "eps_large", "eps_small", "samples", "seed"},
              {},
              {true, true, false, true, true, true, true, true, true, true, true, true, true, true, true}};
      t.add({std::to_string(form.degree()), std::to_string(form.dimension()), join_doubles(form.coefficients(), ';'),
             std::to_string(sm_M), std::to_string(sm_ell), num(sm_w), num(tstar), num(hl.expectation),
             num(hl.standard_error), num(hl.surface), num(hl.surface_stderr), num(hl.eps_large), num(hl.eps_small),
             std::to_string(sm_samples), std::to_string(sm_seed)});
      json cfg;
      sm_form.record(cfg);
      cfg["M"] = sm_M;
      cfg["ell"] = sm_ell;
      cfg["w"] = sm_w;
      cfg["samples"] = sm_samples;
      run.emit(t, "smooth", cfg, sm_seed);
    } else if (count_eq->parsed() || count_ineq->parsed()) {
      const auto a = parse_ints(dq_a);
      json cfg{{"a", dq_a}, {"d", dq_d}, {"M", dq_M}};
      std::uint64_t n = 0;
      std::string command;
      if (count_eq->parsed()) {
        n = count_equation(a, dq_d, dq_M, {dq_primitive, dq_nonzero});
        cfg["primitive"] = dq_primitive;
        cfg["nonzero"] = dq_nonzero;
        command = "dioph count-eq";
      } else {
        n = count_inequality(a, dq_d, dq_M, dq_H);
        cfg["H"] = dq_H;
        command = "dioph count-ineq";
      }
      if (run.format == "csv" && run.out_path.empty()) {
        out << n << "\n";
      } else {
        Table t{{"count"}, {{std::to_string(n)}}, {true}};
        run.emit(t, command, cfg, std::nullopt);
      }
    } else if (fejer->parsed()) {
      const auto f = fejer_chain_check(fj_a1, fj_a2, dq_d, dq_M, dq_H);
      Table t{{"a1", "a2", "d", "M", "H", "mixed", "first", "second", "holds"}, {},
              {true, true, true, true, true, true, true, true, true}};
      t.add({std::to_string(fj_a1), std::to_string(fj_a2), std::to_string(dq_d), std::to_string(dq_M), num(dq_H),
             num(f.mixed), num(f.first), num(f.second), f.holds ? "true" : "false"});
      run.emit(t, "dioph fejer", {{"a1", fj_a1}, {"a2", fj_a2}, {"d", dq_d}, {"M", dq_M}, {"H", dq_H}}, std::nullopt);
    } else if (exponent->parsed()) {
      const auto a = parse_ints(dq_a);
      const auto grid = parse_ints(ex_grid);
      std::vector<std::uint64_t> counts;
      auto counter = [&](std::int64_t M) {
        const std::uint64_t n = ex_kind == "eq" ? count_equation(a, dq_d, M, {dq_primitive, false})
                                                : count_inequality(a, dq_d, M, dq_H);
        counts.push_back(n);
        return n;
      };
      const auto fit = exponent_fit(counter, grid);
      Table t{{"M", "count", "slope", "stderr"}, {}, {true, true, true, true}};
      for (std::size_t i = 0; i < grid.size(); ++i)
        t.add({std::to_string(grid[i]), num(counts[i]), num(fit.slope), num(fit.stderr_slope)});
      run.emit(t, "dioph exponent", {{"kind", ex_kind}, {"a", dq_a}, {"d", dq_d}, {"H", dq_H}, {"grid", ex_grid}},
               std::nullopt);
    } else if (census_cmd->parsed()) {
      cc.mode = cc_mode == "exhaustive" ? CensusMode::exhaustive : CensusMode::sampled;
      cc.seed = cc_seed;
      cc.distinct = cc_halves ? DistinctRule::halves : DistinctRule::all_rows;
      if (!cc_D.empty()) {
        mpz_class D;
        if (D.set_str(cc_D, 10) != 0) throw UsageError("--D must be an integer");
        cc.threshold = D;
      }
      const auto hist = census(cc);
      json cfg{{"ell", cc.rows}, {"k", cc.cols}, {"d", cc.degree}, {"M", cc.M}, {"mode", cc_mode},
               {"samples", cc.samples}, {"D", cc_D.empty() ? "NA" : cc_D}, {"halves", cc_halves}};
      if (run.format == "csv") {
        std::ostringstream body;
        write_census_csv(body, cc, hist);
        run.write_output(run.out_path, body.str(), "census", cfg, cc_seed);
      } else {
        std::ostringstream body;
        write_census_csv(body, cc, hist);
        Table t;
        std::istringstream in(body.str());
        std::string line;
        std::getline(in, line);
        t.header = split(line, ',');
        t.numeric = {true, false, true, true, true, true, true, false, false, false};
        while (std::getline(in, line)) t.add(split(line, ','));
        run.emit(t, "census", cfg, cc_seed);
      }
      err << "census: " << hist.tuples << " tuples, " << hist.rank_deficient << " rank-deficient, "
          << hist.arrangement_failures << " arrangement violations, " << hist.single_coefficient_unexplained
          << " unexplained single-coefficient dependencies\n";
    } else if (sweep->parsed()) {
      std::vector<std::size_t> schedule;
      for (auto v : parse_ints(sw_schedule)) {
        if (v < 2) throw UsageError("schedule entries must be >= 2");
        schedule.push_back(static_cast<std::size_t>(v));
      }
      SweepConfig cfg{parse_box(sw_domain, sw_k), sw_n, sw_seed, schedule, sw_ell, parse_box(sw_box), sw_d, sw_boot};
      if (cfg.domain.dimension() != sw_k) throw UsageError("--domain must have k axes (or one)");
      try {
        cfg.validate();
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
      const auto res = run_sweep(cfg);
      json jc{{"d", sw_d}, {"k", sw_k}, {"domain", sw_domain}, {"n", sw_n}, {"schedule", sw_schedule},
              {"ell", sw_ell}, {"box", sw_box}, {"bootstrap", sw_boot}};
      if (!sw_summary.empty()) {
        std::ostringstream body;
        write_sweep_summary_csv(body, res);
        run.write_output(sw_summary, body.str(), "sweep", jc, sw_seed);
      }
      if (run.format == "csv") {
        std::ostringstream body;
        write_sweep_csv(body, res, schedule);
        run.write_output(run.out_path, body.str(), "sweep", jc, sw_seed);
      } else {
        Table t{{"M", "weak_est", "weak_ci_lo", "weak_ci_hi", "l2_est", "l2_ci_lo", "l2_ci_hi", "median_abs_dev"},
                {},
                std::vector<bool>(8, true)};
        for (const auto& e : res.estimates)
          t.add({std::to_string(e.M), num(e.weak), num(e.weak_ci.lo), num(e.weak_ci.hi), num(e.l2), num(e.l2_ci.lo),
                 num(e.l2_ci.hi), num(e.median_abs_deviation)});
        run.emit(t, "sweep", jc, sw_seed);
      }
      if (res.estimates.size() >= 2) {
        const auto rep = convergence_report(res.estimates);
        if (rep.l2_decay_defined) err << "sweep: L2 decay slope " << format_double(rep.l2_decay.slope) << "\n";
      }
    } else if (dump->parsed()) {
      const DiagonalForm form = dump_form.form();
      const auto seq = generate_sequence(form, dump_M);
      write_sequence(dump_out, seq);
      run.note_output(dump_out);
      json cfg;
      dump_form.record(cfg);
      cfg["M"] = dump_M;
      Runner::write_file(dump_out + ".manifest.json",
                         run.manifest("dump-seq", cfg, dump_form.alpha_seed).dump(2) + "\n");
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace diagform
