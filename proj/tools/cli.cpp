#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddtrsv/factor.hpp"
#include "ddtrsv/krylov.hpp"
#include "ddtrsv/matrix_market.hpp"
#include "ddtrsv/partition.hpp"
#include "ddtrsv/reorder.hpp"
#include "ddtrsv/schedule.hpp"
#include "ddtrsv/sparse_matrix.hpp"
#include "ddtrsv/trisolve.hpp"
#include "ddtrsv/vector_ops.hpp"
#include "ddtrsv/worker_pool.hpp"

namespace ddtrsv::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct RunConfig {
  std::string input;
  std::string gen;
  std::string layout = "scalar";
  std::string tile;
  index_t part_size = 0;
  std::string labels_in;
  std::string labels_out;
  std::string strategy = "auto";
  std::string strategies = "reference,syncfree,level_vc,level_ec";
  std::size_t workers = WorkerPool::default_worker_count();
  std::string precond = "ilu0";
  double tol = 1e-8;
  index_t max_iter = 1000;
  std::string rhs = "manufactured";
  std::string rhs_file;
  std::string output;
  std::string report;
  std::string residuals;
  std::string solution_out;
  bool count_only = false;
  std::uint64_t seed = 0;
  int repeat = 1;
  index_t max_subdomain_rows = 8192;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

GridSpec parse_triple(const std::string& text, const char* what) {
  GridSpec g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.nx >> c1 >> g.ny >> c2 >> g.nz) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof())
    throw InvalidArgument(std::string(what) + " must look like nx,ny,nz, got '" + text + "'");
  return g;
}

std::string grid_name(const GridSpec& g) {
  return "laplacian_" + std::to_string(g.nx) + "x" + std::to_string(g.ny) + "x" + std::to_string(g.nz);
}

int block_dim_of(const std::string& layout) {
  if (layout == "scalar") return 1;
  if (layout == "bsr3") return 3;
  throw InvalidArgument("layout must be scalar or bsr3, got '" + layout + "'");
}

void write_json(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Matrix source

template <int B>
struct Source {
  std::string name;
  std::optional<GridSpec> grid;
  BlockSparseMatrix<B> matrix;
};

template <int B>
Source<B> load_source(const RunConfig& cfg) {
  if (cfg.gen.empty() == cfg.input.empty()) throw InvalidArgument("give exactly one of --input or --gen");
  Source<B> src;
  if (!cfg.gen.empty()) {
    const GridSpec g = parse_triple(cfg.gen, "--gen");
    check_grid(g, B);
    src.grid = g;
    src.name = grid_name(g);
    src.matrix = generate_laplacian<B>(g);
  } else {
    src.name = std::filesystem::path(cfg.input).stem().string();
    auto scalar = read_matrix_market(std::filesystem::path(cfg.input));
    if constexpr (B == 1) {
      src.matrix = std::move(scalar);
    } else {
      src.matrix = csr_to_bsr(scalar);
    }
  }
  if (src.matrix.n_block_rows != src.matrix.n_block_cols) throw DimensionError("matrix must be square");
  return src;
}

// ---------------------------------------------------------------------------
// Decomposition

template <int B>
struct Decomposition {
  BlockSparseMatrix<B> reordered;
  BlockSparseMatrix<B> dropped;
  Permutation perm;
  SubdomainLayout layout;
  DecompositionStats stats;
  index_t part_size = 0;
  bool decomposed = false;
  double partition_ms = 0.0;
  double reorder_ms = 0.0;
};

template <int B>
Decomposition<B> decompose(const Source<B>& src, const RunConfig& cfg, WorkerPool* pool) {
  const int choices = !cfg.tile.empty() + (cfg.part_size > 0) + !cfg.labels_in.empty();
  if (choices > 1) throw InvalidArgument("give at most one of --tile, --part-size, --labels-in");

  Decomposition<B> d;
  const index_t n = src.matrix.n_block_rows;
  if (choices == 0) {
    d.perm = Permutation::identity(n);
    d.layout = SubdomainLayout::single(n);
    d.part_size = n;
    d.reordered = src.matrix;
    d.dropped = src.matrix;
    d.stats = DecompositionStats::from_counts(src.matrix.nnz(), src.matrix.nnz());
    return d;
  }

  auto start = Clock::now();
  PartitionLabels labels;
  if (!cfg.tile.empty()) {
    if (!src.grid) throw InvalidArgument("--tile needs a generated Laplacian (--gen)");
    labels = geometric_cuts(*src.grid, parse_triple(cfg.tile, "--tile"));
  } else if (cfg.part_size > 0) {
    labels = graph_partition_uniform(src.matrix, cfg.part_size, cfg.seed);
  } else {
    labels = read_labels(std::filesystem::path(cfg.labels_in));
    if (static_cast<index_t>(labels.labels.size()) != n)
      throw DimensionError("label file has " + std::to_string(labels.labels.size()) + " rows, matrix has " +
                           std::to_string(n));
  }
  if (!cfg.labels_out.empty()) write_labels(labels, std::filesystem::path(cfg.labels_out));
  d.partition_ms = elapsed_ms(start);

  start = Clock::now();
  d.perm = labels_to_permutation(labels);
  d.layout = SubdomainLayout::from_labels(labels);
  d.part_size = labels.rows_per_subdomain;
  d.reordered = reorder(src.matrix, d.perm, pool);
  auto [dropped, stats] = drop_inter_partition(d.reordered, d.layout);
  d.dropped = std::move(dropped);
  d.stats = stats;
  d.decomposed = true;
  d.reorder_ms = elapsed_ms(start);
  return d;
}

json matrix_json(const std::string& name, index_t nrows, index_t nnz) {
  return {{"name", name}, {"nrows", nrows}, {"nnz", nnz}};
}

json decomposition_json(const DecompositionStats& s, index_t part_size, index_t n_subdomains) {
  return {{"P", part_size},
          {"n_subdomains", n_subdomains},
          {"nnz_dropped", s.dropped},
          {"dropped_fraction", s.dropped_fraction}};
}

json schedule_json(const ScheduleSummary& s) {
  return {{"max_levels", s.max_levels}, {"mean_level_width", s.mean_level_width}};
}

template <int B>
ScheduleSummary lower_schedule_summary(const Decomposition<B>& d, WorkerPool* pool, double& ms) {
  const auto start = Clock::now();
  const auto sched = build_level_schedule(level_assign(d.dropped, Triangle::lower, d.layout, pool), d.layout);
  ms = elapsed_ms(start);
  return summarize(sched);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.gen.empty()) throw InvalidArgument("gen needs --gen nx,ny,nz");
  const GridSpec g = parse_triple(cfg.gen, "--gen");
  const int bd = block_dim_of(cfg.layout);
  check_grid(g, bd);
  if (cfg.count_only) {
    out << "nrows " << g.size() * bd << '\n';
    out << "nnz " << laplacian_block_count(g) * bd * bd << '\n';
    return 0;
  }
  if (cfg.output.empty()) throw InvalidArgument("gen needs --output unless --count-only is set");
  const CsrMatrix a = bd == 1 ? generate_laplacian_csr(g) : bsr_to_csr(generate_laplacian_bsr(g));
  write_matrix_market(a, std::filesystem::path(cfg.output));
  out << "wrote " << cfg.output << " (" << a.rows() << " rows, " << a.nnz() << " nonzeros)\n";
  return 0;
}

int decompose_count_only(const RunConfig& cfg, std::ostream& out) {
  if (cfg.gen.empty() || cfg.tile.empty()) throw InvalidArgument("--count-only decompose needs --gen and --tile");
  const GridSpec g = parse_triple(cfg.gen, "--gen");
  const GridSpec t = parse_triple(cfg.tile, "--tile");
  const int bd = block_dim_of(cfg.layout);
  const auto start = Clock::now();
  const auto stats = laplacian_decomposition_stats(g, t, bd);
  const double ms = elapsed_ms(start);
  const index_t n_sub = (g.nx / t.nx) * (g.ny / t.ny) * (g.nz / t.nz);
  json j{{"schema_version", schema_version},
         {"matrix", matrix_json(grid_name(g), g.size() * bd, stats.nnz_before)},
         {"decomposition", decomposition_json(stats, t.size(), n_sub)},
         {"timings_ms", {{"partition", ms}}}};
  j["decomposition"]["nnz_after"] = stats.nnz_after;
  write_json(j, cfg.report, out);
  return 0;
}

template <int B>
int cmd_decompose(const RunConfig& cfg, WorkerPool* pool, std::ostream& out) {
  const auto src = load_source<B>(cfg);
  const auto d = decompose(src, cfg, pool);
  double schedule_ms = 0.0;
  const auto summary = lower_schedule_summary(d, pool, schedule_ms);
  json j{{"schema_version", schema_version},
         {"matrix", matrix_json(src.name, src.matrix.rows(), src.matrix.nnz())},
         {"decomposition", decomposition_json(d.stats, d.part_size, d.layout.count())},
         {"schedule", schedule_json(summary)},
         {"timings_ms", {{"partition", d.partition_ms}, {"reorder", d.reorder_ms}, {"schedule", schedule_ms}}}};
  j["decomposition"]["nnz_after"] = d.stats.nnz_after;
  write_json(j, cfg.report, out);
  return 0;
}

std::vector<double> read_vector(const std::string& path, index_t n) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw InvalidArgument("malformed value in " + path);
  if (static_cast<index_t>(v.size()) != n)
    throw DimensionError(path + " has " + std::to_string(v.size()) + " values, expected " + std::to_string(n));
  return v;
}

void write_vector(const std::vector<double>& v, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  for (double x : v) f << shortest(x) << '\n';
}

void write_residuals(const std::vector<double>& history, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "iteration,residual\n";
  for (std::size_t i = 0; i < history.size(); ++i) f << i << ',' << shortest(history[i]) << '\n';
}

SolveStrategy resolve_strategy(const std::string& name, bool decomposed) {
  if (name == "auto") return decomposed ? SolveStrategy::level_vc : SolveStrategy::reference;
  return parse_solve_strategy(name);
}

template <int B>
std::unique_ptr<Preconditioner> build_preconditioner(const RunConfig& cfg, const Decomposition<B>& d,
                                                     SolveStrategy strategy, WorkerPool* pool,
                                                     const TrisolveOptions& options) {
  if (cfg.precond == "none") return make_identity_preconditioner();
  if (cfg.precond == "ilu0") return make_ilu0_preconditioner(d.dropped, d.layout, strategy, pool, options);
  if (cfg.precond == "ildu0_fused") {
    if (strategy != SolveStrategy::level_vc && strategy != SolveStrategy::level_ec)
      throw InvalidArgument("ildu0_fused needs strategy level_vc or level_ec");
    const auto traversal = strategy == SolveStrategy::level_ec ? Traversal::edge_centric : Traversal::vertex_centric;
    return make_ildu0_fused_preconditioner(ildu0(ilu0(d.dropped, d.layout, pool)), d.layout, traversal, pool,
                                           options);
  }
  throw InvalidArgument("precond must be none, ilu0 or ildu0_fused, got '" + cfg.precond + "'");
}

template <int B>
int cmd_solve(const RunConfig& cfg, WorkerPool* pool, std::ostream& out, std::ostream& err) {
  if (cfg.repeat < 1) throw InvalidArgument("--repeat must be at least 1");
  const auto src = load_source<B>(cfg);
  const auto d = decompose(src, cfg, pool);
  const auto strategy = resolve_strategy(cfg.strategy, d.decomposed);
  TrisolveOptions options;
  options.max_subdomain_rows = cfg.max_subdomain_rows;

  double schedule_ms = 0.0;
  const auto summary = lower_schedule_summary(d, pool, schedule_ms);

  auto start = Clock::now();
  const auto m = build_preconditioner(cfg, d, strategy, pool, options);
  const double factor_ms = elapsed_ms(start);

  std::vector<double> b;
  const index_t n = src.matrix.rows();
  if (cfg.rhs == "ones") {
    b.assign(static_cast<std::size_t>(n), 1.0);
  } else if (cfg.rhs == "manufactured") {
    b = spmv(src.matrix, std::vector<double>(static_cast<std::size_t>(n), 1.0), pool);
  } else if (cfg.rhs == "file") {
    if (cfg.rhs_file.empty()) throw InvalidArgument("--rhs file needs --rhs-file");
    b = read_vector(cfg.rhs_file, n);
  } else {
    throw InvalidArgument("rhs must be ones, manufactured or file, got '" + cfg.rhs + "'");
  }
  const auto b_reordered = permute_rhs(d.perm, b, B);

  BicgstabConfig bc;
  bc.tol = cfg.tol;
  bc.max_iter = cfg.max_iter;
  SolveReport rep;
  std::vector<double> x_reordered;
  std::vector<double> solve_ms;
  for (int r = 0; r < cfg.repeat; ++r) {
    x_reordered.assign(static_cast<std::size_t>(n), 0.0);
    start = Clock::now();
    rep = bicgstab(d.reordered, b_reordered, x_reordered, *m, bc, pool);
    solve_ms.push_back(elapsed_ms(start));
  }
  const auto x = unpermute_solution(d.perm, x_reordered, B);
  const double true_residual = relative_residual(src.matrix, b, x, pool);

  json solver{{"strategy", std::string(to_string(strategy))},
              {"preconditioner", std::string(m->name())},
              {"iterations", rep.iterations},
              {"converged", rep.converged},
              {"status", std::string(to_string(rep.status))},
              {"final_residual", true_residual},
              {"preconditioned_residual", rep.residual_history.front() > 0.0 ? rep.residual_history.back() / rep.residual_history.front() : 0.0},
              {"workers", pool->size()}};
  if (rep.breakdown_reason) solver["breakdown_reason"] = *rep.breakdown_reason;
  if (cfg.rhs == "manufactured") {
    double err_inf = 0.0;
    for (double v : x) err_inf = std::max(err_inf, std::abs(v - 1.0));
    solver["solution_error_inf"] = err_inf;
  }
  json j{{"schema_version", schema_version},
         {"matrix", matrix_json(src.name, n, src.matrix.nnz())},
         {"decomposition", decomposition_json(d.stats, d.part_size, d.layout.count())},
         {"schedule", schedule_json(summary)},
         {"solver", solver},
         {"timings_ms",
          {{"partition", d.partition_ms},
           {"reorder", d.reorder_ms},
           {"factor", factor_ms},
           {"schedule", schedule_ms},
           {"solve", median(solve_ms)},
           {"spmv", rep.timings.spmv_ms},
           {"precond", rep.timings.precond_ms},
           {"blas1", rep.timings.blas1_ms}}}};

  if (!cfg.report.empty()) write_json(j, cfg.report, out);
  if (!cfg.residuals.empty()) write_residuals(rep.residual_history, cfg.residuals);
  if (!cfg.solution_out.empty()) write_vector(x, cfg.solution_out);
  out << to_string(rep.status) << " after " << rep.iterations << " iterations, relative residual "
      << shortest(true_residual) << '\n';
  if (!rep.converged) {
    err << "ddtrsv: solver did not converge (" << to_string(rep.status)
        << (rep.breakdown_reason ? ": " + *rep.breakdown_reason : std::string()) << ")\n";
    return 3;
  }
  return 0;
}

std::vector<SolveStrategy> parse_strategy_list(const std::string& text) {
  std::vector<SolveStrategy> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(parse_solve_strategy(item));
  if (out.empty()) throw InvalidArgument("no strategies given");
  return out;
}

template <int B>
int cmd_trisolve_bench(const RunConfig& cfg, WorkerPool* pool, std::ostream& out) {
  if (cfg.repeat < 1) throw InvalidArgument("--repeat must be at least 1");
  const auto strategies = parse_strategy_list(cfg.strategies);
  const auto src = load_source<B>(cfg);
  const auto d = decompose(src, cfg, pool);
  TrisolveOptions options;
  options.max_subdomain_rows = cfg.max_subdomain_rows;

  auto start = Clock::now();
  const auto f = ilu0(d.dropped, d.layout, pool);
  const double factor_ms = elapsed_ms(start);
  const auto lower = lower_unit(f.lower);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> b(static_cast<std::size_t>(src.matrix.rows()));
  for (auto& v : b) v = dist(rng);
  std::vector<double> ref(b.size());
  solve_reference(lower, b, ref);

  double schedule_ms = 0.0;
  const auto summary = lower_schedule_summary(d, pool, schedule_ms);
  json results = json::array();
  for (const auto s : strategies) {
    start = Clock::now();
    const TriangularSolver<B> solver(lower, d.layout, s, pool, options);
    const double analysis_ms = elapsed_ms(start);
    std::vector<double> x(b.size());
    std::vector<double> times;
    double deviation = 0.0;
    for (int r = 0; r < cfg.repeat; ++r) {
      start = Clock::now();
      solver.solve(b, x);
      times.push_back(elapsed_ms(start));
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        diff = std::max(diff, std::abs(x[i] - ref[i]));
        scale = std::max(scale, std::abs(ref[i]));
      }
      deviation = std::max(deviation, scale > 0.0 ? diff / scale : diff);
    }
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    results.push_back({{"strategy", std::string(to_string(s))},
                       {"min_ms", *std::min_element(times.begin(), times.end())},
                       {"mean_ms", mean},
                       {"median_ms", median(times)},
                       {"analysis_ms", analysis_ms},
                       {"max_deviation", deviation}});
  }

  json j{{"schema_version", schema_version},
         {"matrix", matrix_json(src.name, src.matrix.rows(), src.matrix.nnz())},
         {"decomposition", decomposition_json(d.stats, d.part_size, d.layout.count())},
         {"schedule", schedule_json(summary)},
         {"repetitions", cfg.repeat},
         {"workers", pool->size()},
         {"results", results},
         {"timings_ms",
          {{"partition", d.partition_ms}, {"reorder", d.reorder_ms}, {"factor", factor_ms}, {"schedule", schedule_ms}}}};
  write_json(j, cfg.report, out);
  return 0;
}

// ---------------------------------------------------------------------------
// Option wiring

void add_source_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "Matrix Market file")->envname("DDTRSV_INPUT");
  cmd->add_option("--gen", cfg.gen, "Generate a 7-point Laplacian on an nx,ny,nz grid")->envname("DDTRSV_GEN");
  cmd->add_option("--layout", cfg.layout, "scalar or bsr3")->envname("DDTRSV_LAYOUT");
}

void add_partition_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--tile", cfg.tile, "Geometric tiles of x,y,z cells (generated grids only)")
      ->envname("DDTRSV_TILE");
  cmd->add_option("--part-size", cfg.part_size, "Graph partition into parts of P rows")->envname("DDTRSV_PART_SIZE");
  cmd->add_option("--labels-in", cfg.labels_in, "Read subdomain labels, one per row");
  cmd->add_option("--labels-out", cfg.labels_out, "Write the subdomain labels used");
  cmd->add_option("--seed", cfg.seed, "Seed for partition tie-breaks and random vectors")->envname("DDTRSV_SEED");
}

void add_run_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--workers", cfg.workers, "Worker threads, including the caller")->envname("DDTRSV_WORKERS");
  cmd->add_option("--report", cfg.report, "JSON report path ('-' for stdout)")->envname("DDTRSV_REPORT");
  cmd->add_option("--max-subdomain-rows", cfg.max_subdomain_rows, "Scratch budget per subdomain, scalar rows")
      ->envname("DDTRSV_MAX_SUBDOMAIN_ROWS");
  cmd->add_option("--repeat", cfg.repeat, "Repetitions for timing")->envname("DDTRSV_REPEAT");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Domain-decomposed sparse triangular solves and BiCGSTAB"};
  app.name(args.empty() ? "ddtrsv" : std::filesystem::path(args.front()).filename().string());
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Write a generated Laplacian as Matrix Market");
  gen->add_option("--gen", cfg.gen, "Grid nx,ny,nz")->required()->envname("DDTRSV_GEN");
  gen->add_option("--layout", cfg.layout, "scalar or bsr3")->envname("DDTRSV_LAYOUT");
  gen->add_option("--output,-o", cfg.output, "Output .mtx path");
  gen->add_flag("--count-only", cfg.count_only, "Print row and nonzero counts without building the matrix");

  auto* dec = app.add_subcommand("decompose", "Partition, reorder and drop couplings; report statistics");
  add_source_options(dec, cfg);
  add_partition_options(dec, cfg);
  add_run_options(dec, cfg);
  dec->add_flag("--count-only", cfg.count_only, "Count a generated Laplacian's decomposition without building it");

  auto* solve = app.add_subcommand("solve", "Run preconditioned BiCGSTAB on the (decomposed) system");
  add_source_options(solve, cfg);
  add_partition_options(solve, cfg);
  add_run_options(solve, cfg);
  solve->add_option("--strategy", cfg.strategy, "auto, reference, syncfree, level_vc or level_ec")
      ->envname("DDTRSV_STRATEGY");
  solve->add_option("--precond", cfg.precond, "none, ilu0 or ildu0_fused")->envname("DDTRSV_PRECOND");
  solve->add_option("--tol", cfg.tol, "Relative convergence tolerance")->envname("DDTRSV_TOL");
  solve->add_option("--max-iter", cfg.max_iter, "Iteration cap")->envname("DDTRSV_MAX_ITER");
  solve->add_option("--rhs", cfg.rhs, "ones, manufactured (b = A 1) or file")->envname("DDTRSV_RHS");
  solve->add_option("--rhs-file", cfg.rhs_file, "Right-hand side, one value per line");
  solve->add_option("--residuals", cfg.residuals, "CSV of the residual history")->envname("DDTRSV_RESIDUALS");
  solve->add_option("--solution-out", cfg.solution_out, "Write x, one value per line");

  auto* bench = app.add_subcommand("trisolve-bench", "Time one lower solve with each strategy");
  add_source_options(bench, cfg);
  add_partition_options(bench, cfg);
  add_run_options(bench, cfg);
  bench->add_option("--strategies", cfg.strategies, "Comma-separated strategies")->envname("DDTRSV_STRATEGIES");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("ddtrsv");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << '\n';
    return 2;
  }

  try {
    if (cfg.workers < 1) throw InvalidArgument("--workers must be at least 1");
    if (gen->parsed()) return cmd_gen(cfg, out);
    if (dec->parsed() && cfg.count_only) return decompose_count_only(cfg, out);

    WorkerPool pool(cfg.workers);
    const int bd = block_dim_of(cfg.layout);
    if (dec->parsed()) return bd == 1 ? cmd_decompose<1>(cfg, &pool, out) : cmd_decompose<3>(cfg, &pool, out);
    if (solve->parsed())
      return bd == 1 ? cmd_solve<1>(cfg, &pool, out, err) : cmd_solve<3>(cfg, &pool, out, err);
    return bd == 1 ? cmd_trisolve_bench<1>(cfg, &pool, out) : cmd_trisolve_bench<3>(cfg, &pool, out);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << app.get_name() << ": " << msg << '\n';
    return 1;
  }
}

}  // namespace ddtrsv::cli
