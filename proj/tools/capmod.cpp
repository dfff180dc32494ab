// capmod command line: capacities, metrics, canonical representatives,
// module checks, studies and property suites on JSON graph models.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "capmod/capmod.hpp"

namespace fs = std::filesystem;
using namespace capmod;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Globals {
  std::string format = "json";
  std::uint64_t seed = 7;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error("'" + path + "': " + ex.what());
  }
}

Space load_space(const std::string& path) { return space_from_json(read_json(path)); }

std::vector<std::string> split_ids(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json ids_of(const Space& s, const Subset& set) {
  json out = json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (set[i]) out.push_back(s.id(i));
  return out;
}

// Flat objects as key,value rows.
std::string flat_csv(const json& j) {
  std::ostringstream os;
  os << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_object()) {
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
        os << it.key() << '.' << jt.key() << ',' << jt.value().dump() << '\n';
    } else {
      os << it.key() << ',' << it.value().dump() << '\n';
    }
  }
  return os.str();
}

void emit(const Globals& g, const json& j) {
  if (g.format == "csv")
    std::cout << flat_csv(j);
  else
    std::cout << j.dump(2) << '\n';
}

int emit_report(const Globals& g, const Report& r, const std::string& report_path) {
  if (!report_path.empty()) write_report(r, report_path);
  if (g.format == "csv")
    std::cout << r.to_csv();
  else
    std::cout << r.to_json().dump(2) << '\n';
  return r.pass() ? kExitPass : kExitFail;
}

std::vector<fs::path> json_files(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error("no .json files in '" + p.string() + "'");
  return out;
}

// ---- subcommands ---------------------------------------------------------

int run_space(const Globals& g, const std::string& path) {
  const Space s = load_space(path);
  const auto labels = s.components();
  const std::size_t components = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  emit(g, {{"vertices", s.size()},
           {"edges", s.edge_count()},
           {"total_mass", s.total_mass()},
           {"components", components},
           {"null_vertices", ids_of(s, s.null_vertices())},
           {"cap_null_vertices", ids_of(s, s.cap_null_vertices())},
           {"exhaustion_length", s.exhaustion().size()},
           {"constant_exhaustion", s.has_constant_exhaustion()},
           {"regime", to_string(regime(s))}});
  return kExitPass;
}

int run_cap(const Globals& g, const std::string& path, const std::string& set_list, bool oracle) {
  const Space s = load_space(path);
  const Subset set = s.subset(split_ids(set_list));
  const CapacityResult r = capacity(s, set);
  json out{{"value", r.value}, {"potential", function_to_json(s, r.potential)}, {"kkt_ok", r.kkt_ok},
           {"solver", to_string(r.solver)}};
  bool pass = r.kkt_ok;
  if (oracle) {
    BruteForceOptions opt;
    opt.seed = g.seed;
    const double b = brute_force_capacity(s, set, opt);
    out["oracle"] = b;
    out["oracle_gap"] = std::abs(b - r.value);
    pass = pass && std::abs(b - r.value) <= 1e-6;
  }
  emit(g, out);
  return pass ? kExitPass : kExitFail;
}

int run_dcap(const Globals& g, const std::string& space_path, const std::string& f_path, const std::string& g_path) {
  const CapContext ctx(load_space(space_path));
  if (!fs::is_directory(f_path) && !fs::is_directory(g_path)) {
    const double d = dcap(ctx, function_from_json(ctx.space(), read_json(f_path)),
                          function_from_json(ctx.space(), read_json(g_path)));
    std::cout << number(d) << '\n';
    return kExitPass;
  }
  const auto fs_list = json_files(f_path), gs_list = json_files(g_path);
  if (g.format == "json") {
    json rows = json::array();
    for (const auto& fp : fs_list)
      for (const auto& gp : gs_list)
        rows.push_back({{"f", fp.filename().string()}, {"g", gp.filename().string()},
                        {"dcap", dcap(ctx, function_from_json(ctx.space(), read_json(fp.string())),
                                      function_from_json(ctx.space(), read_json(gp.string())))}});
    std::cout << rows.dump(2) << '\n';
    return kExitPass;
  }
  std::cout << "f,g,dcap\n";
  for (const auto& fp : fs_list)
    for (const auto& gp : gs_list)
      std::cout << fp.filename().string() << ',' << gp.filename().string() << ','
                << number(dcap(ctx, function_from_json(ctx.space(), read_json(fp.string())),
                               function_from_json(ctx.space(), read_json(gp.string()))))
                << '\n';
  return kExitPass;
}

int run_dqu(const Globals& g, const std::string& space_path, const std::string& f_path, const std::string& g_path,
            const std::string& method) {
  const CapContext ctx(load_space(space_path));
  const DquMethod m = method == "brute" ? DquMethod::brute_force
                      : method == "upper" ? DquMethod::upper_bound
                                          : DquMethod::exact_scan;
  const DquResult r = dqu(ctx, function_from_json(ctx.space(), read_json(f_path)),
                          function_from_json(ctx.space(), read_json(g_path)), m);
  json out{{"value", r.value}, {"optimal_set", ids_of(ctx.space(), r.optimal_set)}, {"method", to_string(r.method)},
           {"downgraded", r.downgraded}};
  out["threshold"] = r.threshold ? json(*r.threshold) : json(nullptr);
  emit(g, out);
  return kExitPass;
}

int run_qcr(const Globals& g, const std::string& space_path, const std::string& class_path) {
  const Space s = load_space(space_path);
  const CapClass c = qcr(s, mclass_from_json(s, read_json(class_path)));
  emit(g, function_to_json(s, c.representative, true));
  return kExitPass;
}

int run_module_verify(const Globals& g, const std::string& space_path, const std::string& suite,
                      const std::vector<std::string>& field_paths, std::size_t samples,
                      const std::string& report_path) {
  const CapContext ctx(load_space(space_path));
  const Space& s = ctx.space();
  const std::size_t n = s.size();
  Rng rng = Rng(g.seed).split(6);
  std::vector<DartField> fields;
  for (const auto& p : field_paths) fields.push_back(field_from_json(s, read_json(p)));
  while (fields.size() < samples) fields.push_back(random_field(s, rng));

  Report r("module/" + suite, "dart-field module checks");
  r.parameters() = {{"suite", suite}, {"seed", g.seed}, {"samples", fields.size()}, {"tolerance", kModuleTol}};
  if (suite == "axioms") {
    std::vector<VertexFunction> scalars{random_function(rng, n), random_function(rng, n),
                                        indicator(random_subset(rng, n))};
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
      Report one("pair" + std::to_string(i / 2));
      one.merge(check_module_axioms(ctx, scalars, {fields[i], fields[i + 1], zero_field(s)}));
      r.merge(one);
    }
  } else if (suite == "hilbert") {
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
      Report one("pair" + std::to_string(i / 2));
      one.merge(check_parallelogram(s, fields[i], fields[i + 1]));
      r.merge(one);
    }
  } else if (suite == "quotient") {
    double norm_dev = 0.0;
    bool identity = true;
    for (const auto& v : fields) {
      norm_dev = std::max(norm_dev, pr_bar_norm_deviation(s, v));
      const MDartClass c = pr_bar(s, v);
      identity = identity && same_class(s, pr_bar(s, qcr_field(s, c)), c);
    }
    r.check_close("|pr_bar(v)| = Pr(|v|)", 0.0, norm_dev, kModuleTol);
    r.check_true("pr_bar(qcr_field(c)) = c", identity);
  } else {
    std::vector<DartField> tests = fields;
    for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(s.dart_count()); ++d)
      tests.push_back(DartField::Unit(static_cast<Eigen::Index>(s.dart_count()), d));
    const Eigen::MatrixXd mask = charged_dart_mask(s).asDiagonal();
    const std::vector<std::pair<std::string, Eigen::MatrixXd>> ops{
        {"mask", mask}, {"half_mask", 0.5 * mask}, {"multiplier", pr_bar_times(s, random_function(rng, n, -1.0, 1.0))}};
    for (const auto& [name, T] : ops) {
      Report one(name);
      one.merge(factor_through(s, T, tests, &rng).report);
      r.merge(one);
    }
  }
  return emit_report(g, r, report_path);
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  for (const auto& item : split_ids(list)) {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(item, &pos);
    if (pos != item.size()) throw Error("not a grid size: '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

int run_study(const Globals& g, const std::string& name, double L, const std::string& sizes, std::size_t count,
              const std::string& report_path) {
  Report r("study");
  if (name == "refine_1d") {
    r = study_refine_1d(L, parse_sizes(sizes.empty() ? "251,501,1001,2001" : sizes));
  } else if (name == "refine_2d") {
    r = study_refine_2d(parse_sizes(sizes.empty() ? "16,32,64" : sizes));
  } else {
    const std::vector<std::size_t> n = parse_sizes(sizes.empty() ? "1001" : sizes);
    if (n.size() != 1) throw Error("study " + name + ": expects a single grid size");
    r = name == "dominated" ? scenario_dominated_convergence_failure(n.front(), count)
                            : scenario_capae_vs_dcap(n.front(), count);
  }
  return emit_report(g, r, report_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capmod: capacity calculus on weighted graphs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", g.seed, "seed for randomized checks");

  std::string space_path, set_list, f_path, g_path, class_path, method = "exact", suite, report_path, study_name,
                                                                 sizes;
  bool oracle = false;
  std::vector<std::string> field_paths;
  std::size_t samples = 20, count = 10;
  double L = 10.0;

  auto* space_cmd = app.add_subcommand("space", "validate and summarize a space");
  space_cmd->add_option("--space", space_path, "space JSON")->required();

  auto* cap_cmd = app.add_subcommand("cap", "capacity of a vertex set");
  cap_cmd->add_option("--space", space_path, "space JSON")->required();
  cap_cmd->add_option("--set", set_list, "comma-separated vertex ids")->required();
  cap_cmd->add_flag("--oracle", oracle, "compare with the projected-gradient oracle");

  auto* dcap_cmd = app.add_subcommand("dcap", "d_Cap distance; directories give a CSV batch");
  dcap_cmd->add_option("--space", space_path, "space JSON")->required();
  dcap_cmd->add_option("--f", f_path, "function JSON or directory")->required();
  dcap_cmd->add_option("--g", g_path, "function JSON or directory")->required();

  auto* dqu_cmd = app.add_subcommand("dqu", "quasi-uniform distance");
  dqu_cmd->add_option("--space", space_path, "space JSON")->required();
  dqu_cmd->add_option("--f", f_path, "function JSON")->required();
  dqu_cmd->add_option("--g", g_path, "function JSON")->required();
  dqu_cmd->add_option("--method", method, "exact|brute|upper")->check(CLI::IsMember({"exact", "brute", "upper"}));

  auto* qcr_cmd = app.add_subcommand("qcr", "canonical representative of an m-class");
  qcr_cmd->add_option("--space", space_path, "space JSON")->required();
  qcr_cmd->add_option("--class", class_path, "class JSON")->required();

  auto* module_cmd = app.add_subcommand("module", "dart-field module checks");
  module_cmd->require_subcommand(1);
  auto* module_verify = module_cmd->add_subcommand("verify", "run a module check suite");
  module_verify->add_option("--space", space_path, "space JSON")->required();
  module_verify->add_option("--suite", suite, "axioms|hilbert|quotient|factor")
      ->required()
      ->check(CLI::IsMember({"axioms", "hilbert", "quotient", "factor"}));
  module_verify->add_option("--field", field_paths, "dart field JSON (repeatable)");
  module_verify->add_option("--samples", samples, "total number of fields")->check(CLI::Range(2, 100000));
  module_verify->add_option("--report", report_path, "write JSON and CSV report");

  auto* study_cmd = app.add_subcommand("study", "refinement studies and scenarios");
  study_cmd->add_option("name", study_name, "refine_1d|refine_2d|dominated|capae")
      ->required()
      ->check(CLI::IsMember({"refine_1d", "refine_2d", "dominated", "capae"}));
  study_cmd->add_option("--L", L, "half-length of the 1-D domain");
  study_cmd->add_option("--n", sizes, "comma-separated grid sizes");
  study_cmd->add_option("--count", count, "number of moving singletons");
  study_cmd->add_option("--report", report_path, "write JSON and CSV report");

  auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
  verify_cmd->add_option("--suite", suite, "suite name")->required();
  verify_cmd->add_option("--report", report_path, "write JSON and CSV report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (*space_cmd) return run_space(g, space_path);
    if (*cap_cmd) return run_cap(g, space_path, set_list, oracle);
    if (*dcap_cmd) return run_dcap(g, space_path, f_path, g_path);
    if (*dqu_cmd) return run_dqu(g, space_path, f_path, g_path, method);
    if (*qcr_cmd) return run_qcr(g, space_path, class_path);
    if (*module_verify) return run_module_verify(g, space_path, suite, field_paths, samples, report_path);
    if (*study_cmd) return run_study(g, study_name, L, sizes, count, report_path);
    if (*verify_cmd) {
      const Report r = run_suite(suite, g.seed);
      return emit_report(g, r, report_path);
    }
  } catch (const std::exception& ex) {
    std::cerr << "capmod: " << ex.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
