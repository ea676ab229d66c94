// Command-line front end for the rinclose library.

#include <rinclose/compare.hpp>
#include <rinclose/enumerator.hpp>
#include <rinclose/io.hpp>
#include <rinclose/oracle.hpp>
#include <rinclose/preprocess.hpp>
#include <rinclose/rules.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace rinclose;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct InputFlags {
  std::string path;
  std::string schema;
  std::string delimiter;
  bool no_header = false;
  bool decimal_comma = false;
  std::string missing;
  std::string label;
  std::vector<std::string> drop;

  void add(CLI::App* app, bool labeled = false) {
    app->add_option("-i,--input", path, "Delimited data file")->required()->check(CLI::ExistingFile);
    app->add_option("--schema", schema, "JSON schema sidecar")->check(CLI::ExistingFile);
    app->add_option("--delimiter", delimiter, "Field delimiter (default: tab if present, else ',')");
    app->add_flag("--no-header", no_header, "First line holds data");
    app->add_flag("--decimal-comma", decimal_comma, "Numbers use ',' as decimal separator");
    app->add_option("--missing", missing, "Missing-value sentinel (default NA)");
    app->add_option("--drop", drop, "Columns to ignore (name or 1-based position)");
    if (labeled) app->add_option("--label", label, "Class label column (name or 1-based position)");
  }

  LoadedDataset load() const {
    ParseOptions opt;
    if (!schema.empty()) opt.schema = Schema::load(schema);
    if (!delimiter.empty()) {
      std::string d = delimiter == "\\t" || delimiter == "tab" ? "\t" : delimiter;
      if (d.size() != 1) throw ConfigError("delimiter must be one character");
      opt.delimiter = d[0];
    }
    if (no_header) opt.header = false;
    if (decimal_comma) opt.decimal_comma = true;
    if (!missing.empty()) opt.missing = missing;
    if (!label.empty()) opt.label = label;
    opt.drop = drop;
    return parse_dataset(path, opt);
  }
};

struct EnumFlags {
  std::optional<double> eps;
  std::vector<double> eps_list;
  std::string binning;
  std::size_t min_row = 1;
  std::size_t min_col = 1;
  std::string variant = "cvc3";
  bool no_pn = false;
  bool no_pruning = false;
  std::size_t max_biclusters = 0;
  double time_limit = 0;

  void add(CLI::App* app, bool with_variant = true) {
    app->add_option("-e,--eps", eps, "Global maximum perturbation");
    app->add_option("--eps-list", eps_list, "Per-column maximum perturbation")->delimiter(',');
    app->add_option("--binning", binning, "Take eps from a binning rule (scott, fd, sturges, sqrt, width:W, count:K)");
    app->add_option("--min-row", min_row, "Minimum number of rows");
    app->add_option("--min-col", min_col, "Minimum number of columns");
    if (with_variant) {
      app->add_option("--variant", variant, "cvc3, cvcp or legacy")
          ->check(CLI::IsMember({"cvc3", "cvcp", "legacy"}));
      app->add_flag("--no-pn", no_pn, "Disable PN inheritance");
      app->add_flag("--no-pruning", no_pruning, "Disable min_col pruning");
      app->add_option("--max-biclusters", max_biclusters, "Stop after this many biclusters");
      app->add_option("--time-limit", time_limit, "Stop after this many seconds");
    }
  }

  EnumParams build(const LoadedDataset& ds) const {
    const Matrix& mat = ds.data.matrix;
    EnumParams p;
    p.min_row = min_row;
    p.min_col = min_col;
    p.pn_inheritance = !no_pn;
    p.min_col_pruning = !no_pruning;
    p.max_biclusters = max_biclusters;
    p.time_limit_seconds = time_limit;
    p.variant = variant == "cvcp" ? Variant::cvcp : variant == "legacy" ? Variant::cvc_legacy : Variant::cvc3;

    int sources = eps.has_value() + !eps_list.empty() + !binning.empty();
    if (sources > 1) throw ConfigError("use only one of --eps, --eps-list and --binning");
    if (!binning.empty()) {
      p.eps = eps_from_binning(fit_binning(mat, BinningRule::parse(binning)));
    } else if (!eps_list.empty()) {
      if (eps_list.size() != mat.cols()) throw ConfigError("--eps-list needs one value per column");
      p.eps = eps_list;
    } else {
      p.eps.assign(mat.cols(), eps.value_or(0.0));
    }
    // Schema eps wins for the columns that declare one; nominal columns always use 0.
    for (std::size_t j = 0; j < mat.cols(); ++j) {
      if (j < ds.eps.size() && ds.eps[j]) p.eps[j] = *ds.eps[j];
      if (mat.kind(j) == ColumnKind::nominal) p.eps[j] = 0.0;
    }
    if (!eps && eps_list.empty() && binning.empty() && p.variant != Variant::cvcp) {
      bool any_schema = std::any_of(ds.eps.begin(), ds.eps.end(), [](const auto& e) { return e.has_value(); });
      if (!any_schema) std::fprintf(stderr, "note: no eps given, using 0 (perfect biclusters)\n");
    }
    return p;
  }
};

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path);
  return file;
}

Matrix maybe_binary(const Matrix& m, bool binary) { return binary ? to_binary_mode(m) : m; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enumerate maximal biclusters with constant values on columns"};
  app.require_subcommand(1);

  // enumerate
  InputFlags en_in;
  EnumFlags en_p;
  bool en_binary = false, en_timing = false;
  std::string en_out, en_format = "jsonl";
  auto* en = app.add_subcommand("enumerate", "Enumerate all maximal CVC biclusters");
  en_in.add(en);
  en_p.add(en);
  en->add_flag("--binary", en_binary, "Treat 0 cells as missing (formal concepts of a 0/1 matrix)");
  en->add_option("-o,--output", en_out, "Output file (default stdout)");
  en->add_option("--format", en_format, "jsonl or table")->check(CLI::IsMember({"jsonl", "table"}));
  en->add_flag("--timing", en_timing, "Include runtime in the footer");

  // verify
  InputFlags ve_in;
  EnumFlags ve_p;
  std::string ve_sol;
  bool ve_oracle = false, ve_binary = false;
  auto* ve = app.add_subcommand("verify", "Check a solution for correctness, maximality and duplicates");
  ve_in.add(ve);
  ve_p.add(ve, false);
  ve->add_option("-s,--solution", ve_sol, "Solution file written by enumerate")->required()->check(CLI::ExistingFile);
  ve->add_flag("--oracle", ve_oracle, "Also compare with the brute-force enumeration (n <= 16)");
  ve->add_flag("--binary", ve_binary, "Treat 0 cells as missing");

  // oracle
  InputFlags or_in;
  EnumFlags or_p;
  std::string or_out;
  bool or_binary = false;
  auto* orc = app.add_subcommand("oracle", "Brute-force enumeration for small matrices (n <= 16)");
  or_in.add(orc);
  or_p.add(orc, false);
  orc->add_option("-o,--output", or_out, "Output file (default stdout)");
  orc->add_flag("--binary", or_binary, "Treat 0 cells as missing");

  // generate
  SyntheticConfig gen_cfg;
  std::string gen_out, gen_truth;
  auto* gen = app.add_subcommand("generate", "Synthetic matrix with planted biclusters");
  gen->add_option("--rows", gen_cfg.n);
  gen->add_option("--cols", gen_cfg.m);
  gen->add_option("--biclusters", gen_cfg.num_biclusters);
  gen->add_option("--bic-rows", gen_cfg.bic_rows);
  gen->add_option("--bic-cols", gen_cfg.bic_cols);
  gen->add_option("--overlap", gen_cfg.overlap);
  gen->add_option("--missing-pct", gen_cfg.missing_pct);
  gen->add_option("--sigma", gen_cfg.noise_sigma);
  gen->add_option("--seed", gen_cfg.rng_seed);
  gen->add_option("--scale", gen_cfg.integer_scale, "Multiply by this and round (0 keeps reals)");
  gen->add_option("-o,--output", gen_out, "Matrix CSV")->required();
  gen->add_option("--truth", gen_truth, "Planted biclusters as JSON lines");

  // bin
  InputFlags bin_in;
  std::string bin_rule = "fd", bin_out;
  auto* bin = app.add_subcommand("bin", "Equal-width partitioning");
  bin_in.add(bin);
  bin->add_option("--rule", bin_rule, "scott, fd, sturges, sqrt, width:W, count:K (append @ORIGIN to fix the first edge)");
  bin->add_option("-o,--output", bin_out, "Partitioned CSV (default stdout)");

  // itemize
  InputFlags it_in;
  std::string it_rule = "fd", it_out;
  bool it_multi = false;
  double it_delta = -1;
  auto* itz = app.add_subcommand("itemize", "Partition then expand bins into binary item columns");
  it_in.add(itz);
  itz->add_option("--rule", it_rule, "Binning rule");
  itz->add_flag("--multi", it_multi, "Also assign neighbouring bins near bin edges");
  itz->add_option("--delta", it_delta, "Edge distance for --multi (default floor((width-1)/2))");
  itz->add_option("-o,--output", it_out, "Binary CSV (default stdout)");

  // prep
  InputFlags pr_in;
  double pr_shift = 0;
  std::string pr_out;
  bool pr_transpose = false;
  auto* pr = app.add_subcommand("prep", "Log, min-max scale and integerize to [0,1000]");
  pr_in.add(pr);
  pr->add_option("--shift", pr_shift, "Added before taking the logarithm");
  pr->add_flag("--transpose", pr_transpose, "Transpose instead (CVR mining)");
  pr->add_option("-o,--output", pr_out, "Output CSV (default stdout)");

  // rules
  InputFlags ru_in;
  EnumFlags ru_p;
  RuleThresholds ru_t;
  bool ru_apriori = false;
  std::string ru_out;
  auto* ru = app.add_subcommand("rules", "Mine quantitative class association rules");
  ru_in.add(ru, true);
  ru_p.add(ru);
  ru->add_option("--conf-min", ru_t.conf_min);
  ru->add_option("--lift-dist", ru_t.lift_dist_min);
  ru->add_flag("--apriori", ru_apriori, "Mine perfect biclusters of the binned data instead");
  ru->add_option("-o,--output", ru_out, "Rules as JSON lines (default stdout)");

  // compare
  InputFlags co_in;
  std::string co_rule = "fd";
  std::size_t co_min_row = 1, co_min_col = 1;
  bool co_json = false;
  auto* co = app.add_subcommand("compare", "A priori versus online partitioning");
  co_in.add(co, true);
  co->add_option("--rule", co_rule, "Binning rule");
  co->add_option("--min-row", co_min_row);
  co->add_option("--min-col", co_min_col);
  co->add_flag("--json", co_json, "Print the report as JSON");

  // bench
  SyntheticConfig be_cfg;
  be_cfg.n = 1000;
  be_cfg.m = 50;
  be_cfg.num_biclusters = 10;
  be_cfg.bic_rows = 50;
  be_cfg.bic_cols = 8;
  be_cfg.integer_scale = 1000;
  double be_eps = 300, be_limit = 30;
  std::size_t be_min_row = 50, be_min_col = 8;
  auto* be = app.add_subcommand("bench", "Runtime and tracked memory of CVC3 versus the symbol-table variant");
  be->add_option("--rows", be_cfg.n);
  be->add_option("--cols", be_cfg.m);
  be->add_option("--biclusters", be_cfg.num_biclusters);
  be->add_option("--bic-rows", be_cfg.bic_rows);
  be->add_option("--bic-cols", be_cfg.bic_cols);
  be->add_option("--sigma", be_cfg.noise_sigma);
  be->add_option("--seed", be_cfg.rng_seed);
  be->add_option("--eps", be_eps);
  be->add_option("--min-row", be_min_row);
  be->add_option("--min-col", be_min_col);
  be->add_option("--time-limit", be_limit, "Per-variant budget in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*en) {
      auto ds = en_in.load();
      Matrix mat = maybe_binary(ds.data.matrix, en_binary);
      auto p = en_p.build(ds);
      auto res = enumerate(mat, p);
      std::ofstream f;
      WriteOptions wo;
      wo.format = en_format == "table" ? SolutionFormat::table : SolutionFormat::jsonl;
      wo.include_runtime = en_timing;
      write_solution(res.solution, res.stats, mat, output(en_out, f), wo);
      if (res.stats.truncated) std::fprintf(stderr, "warning: enumeration stopped early by the budget\n");
    } else if (*ve) {
      auto ds = ve_in.load();
      Matrix mat = maybe_binary(ds.data.matrix, ve_binary);
      auto p = ve_p.build(ds);
      std::ifstream sin(ve_sol);
      auto sol = read_solution(sin);
      auto rep = verify(mat, sol, p, ve_oracle);
      json j = {{"checked", sol.size()},
                {"correct", rep.correct_count},
                {"incorrect", rep.incorrect.size()},
                {"non_maximal", rep.non_maximal.size()},
                {"duplicate_rowsets", rep.duplicate_rowsets.size()},
                {"oracle_run", rep.oracle_run},
                {"missing_from_solution", rep.missing_from_solution.size()},
                {"extra_in_solution", rep.extra_in_solution.size()},
                {"passes", rep.passes()}};
      std::cout << j.dump(2) << "\n";
      if (ve_oracle && !rep.oracle_run) std::fprintf(stderr, "note: matrix too large for the oracle\n");
      return rep.passes() ? kExitOk : kExitVerify;
    } else if (*orc) {
      auto ds = or_in.load();
      Matrix mat = maybe_binary(ds.data.matrix, or_binary);
      auto p = or_p.build(ds);
      auto sol = brute_force(mat, p);
      EnumStats st;
      st.bicluster_count = sol.size();
      std::ofstream f;
      write_solution(sol, st, mat, output(or_out, f));
    } else if (*gen) {
      auto data = generate_synthetic(gen_cfg);
      std::ofstream f(gen_out, std::ios::binary);
      if (!f) throw DataError("cannot write " + gen_out);
      write_matrix(data.matrix, f);
      if (!gen_truth.empty()) {
        std::ofstream t(gen_truth, std::ios::binary);
        if (!t) throw DataError("cannot write " + gen_truth);
        for (const auto& b : data.truth.biclusters) t << json{{"rows", b.rows}, {"cols", b.cols}}.dump() << "\n";
      }
    } else if (*bin) {
      auto ds = bin_in.load();
      auto spec = fit_binning(ds.data.matrix, BinningRule::parse(bin_rule));
      std::size_t clamped = 0;
      Matrix part = partition(ds.data.matrix, spec, &clamped);
      for (std::size_t j = 0; j < spec.columns.size(); ++j) {
        const auto& c = spec.columns[j];
        if (c.passthrough) continue;
        std::fprintf(stderr, "%s: %zu bins, width %g, first edge %g\n", ds.data.matrix.name(j).c_str(), c.bins,
                     c.width, c.lo);
      }
      for (const auto& w : spec.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::ofstream f;
      write_matrix(part, output(bin_out, f));
    } else if (*itz) {
      auto ds = it_in.load();
      auto spec = fit_binning(ds.data.matrix, BinningRule::parse(it_rule));
      Matrix part = partition(ds.data.matrix, spec);
      std::vector<std::size_t> bins;
      for (const auto& c : spec.columns) bins.push_back(c.bins);
      Matrix items = it_multi ? itemize_multi(part, ds.data.matrix, spec,
                                              it_delta >= 0 ? std::optional<double>(it_delta) : std::nullopt)
                              : itemize(part, bins);
      for (std::size_t j = 0; j < items.cols(); ++j) items.set_levels(j, {});
      std::ofstream f;
      write_matrix(items, output(it_out, f));
    } else if (*pr) {
      auto ds = pr_in.load();
      std::vector<std::string> warnings;
      Matrix out = pr_transpose ? transpose(ds.data.matrix) : preprocess_log_scale(ds.data.matrix, pr_shift, &warnings);
      for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::ofstream f;
      write_matrix(out, output(pr_out, f));
    } else if (*ru) {
      auto ds = ru_in.load();
      if (ds.data.labels.empty()) throw ConfigError("rules needs a --label column");
      auto p = ru_p.build(ds);
      LabeledDataset mined = ds.data;
      EnumResult res;
      if (ru_apriori) {
        if (ru_p.binning.empty()) throw ConfigError("--apriori needs --binning");
        auto spec = fit_binning(ds.data.matrix, BinningRule::parse(ru_p.binning));
        Matrix part = partition(ds.data.matrix, spec);
        res = enumerate_cvcp(part, p);
      } else {
        res = enumerate(ds.data.matrix, p);
      }
      auto rules = mine_qcars(mined, res.solution, ru_t);
      std::ofstream f;
      write_rules(mined, rules, output(ru_out, f));
      std::fprintf(stderr, "%zu biclusters, %zu rules, row coverage %.2f%%\n", res.solution.size(), rules.size(),
                   row_coverage(mined, rules));
    } else if (*co) {
      auto ds = co_in.load();
      EnumParams p;
      p.min_row = co_min_row;
      p.min_col = co_min_col;
      auto rep = run_compare(ds.data.matrix, BinningRule::parse(co_rule), p);
      json j = {{"rule", BinningRule::parse(co_rule).to_string()},
                {"eps", rep.eps},
                {"apriori", rep.apriori.size()},
                {"online", rep.online.size()},
                {"apriori_coverage", rep.apriori_coverage},
                {"online_coverage", rep.online_coverage},
                {"contained", rep.contained},
                {"full_containment", rep.full_containment()},
                {"already_maximal", rep.already_maximal},
                {"missed", rep.missed}};
      if (co_json) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::printf("binning          %s\n", j["rule"].get<std::string>().c_str());
        std::printf("a priori         %zu biclusters, %zu cells covered\n", rep.apriori.size(), rep.apriori_coverage);
        std::printf("online           %zu biclusters, %zu cells covered\n", rep.online.size(), rep.online_coverage);
        std::printf("contained        %zu of %zu%s\n", rep.contained, rep.apriori.size(),
                    rep.full_containment() ? " (all)" : "");
        std::printf("already maximal  %zu\n", rep.already_maximal);
        std::printf("missed           %zu\n", rep.missed);
      }
    } else if (*be) {
      auto data = generate_synthetic(be_cfg);
      json report = json::array();
      for (Variant v : {Variant::cvc3, Variant::cvc_legacy}) {
        EnumParams p = EnumParams::uniform(data.matrix.cols(), be_eps, be_min_row, be_min_col);
        p.variant = v;
        p.time_limit_seconds = be_limit;
        std::size_t count = 0;
        auto st = enumerate_into(data.matrix, p, [&](const IndexSet&, const IndexSet&) { ++count; });
        report.push_back({{"variant", to_string(v)},
                          {"biclusters", count},
                          {"seconds", st.seconds},
                          {"peak_tracked_bytes", st.peak_tracked_bytes},
                          {"symbol_table_entries", st.symbol_table_entries},
                          {"truncated", st.truncated}});
      }
      std::cout << report.dump(2) << "\n";
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
