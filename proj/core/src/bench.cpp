#include "meshgemm/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace meshgemm {

namespace {

bool same_value(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool rows_equal(const BenchRow& a, const BenchRow& b) {
  return a.description == b.description && same_value(a.model_time_s, b.model_time_s) &&
         same_value(a.percent, b.percent) && same_value(a.gflops, b.gflops) &&
         same_value(a.wall_time_s, b.wall_time_s) &&
         same_value(a.residue, b.residue) && a.status == b.status;
}

std::string fmt_cell(double v, int prec = 6) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

nlohmann::json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double null_or_num(const nlohmann::json& j) {
  return j.is_null() ? BenchRow::nan_ : j.get<double>();
}

}  // namespace

bool reports_equal(const BenchReport& a, const BenchReport& b) {
  if (a.title != b.title || a.failed != b.failed ||
      !same_value(a.mean_rel_err, b.mean_rel_err) ||
      !same_value(a.max_rel_err, b.max_rel_err) ||
      a.rows.size() != b.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (!rows_equal(a.rows[i], b.rows[i])) return false;
  }
  return true;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw std::invalid_argument("unknown report format: " + name);
}

std::string emit_report(const BenchReport& report, ReportFormat format) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::Text: {
      os << report.title << "\n";
      os << std::left << std::setw(44) << "Description" << std::right
         << std::setw(13) << "Time (s)" << std::setw(8) << "%" << std::setw(10)
         << "GFLOPS" << std::setw(12) << "residue" << std::setw(9) << "status"
         << "\n";
      for (const auto& r : report.rows) {
        os << std::left << std::setw(44) << r.description << std::right
           << std::setw(13) << fmt_cell(r.model_time_s) << std::setw(8)
           << fmt_cell(r.percent, 3) << std::setw(10) << fmt_cell(r.gflops, 4)
           << std::setw(12) << fmt_cell(r.residue, 3) << std::setw(9)
           << (r.status.empty() ? "-" : r.status) << "\n";
      }
      if (!std::isnan(report.mean_rel_err)) {
        os << "Mean Relative Error    " << fmt_cell(report.mean_rel_err, 3)
           << "\n";
      }
      if (!std::isnan(report.max_rel_err)) {
        os << "Maximum Relative Error " << fmt_cell(report.max_rel_err, 3)
           << "\n";
      }
      break;
    }
    case ReportFormat::Csv: {
      os << "description,model_time_s,percent,gflops,wall_time_s,residue,status\n";
      os << std::setprecision(17);
      for (const auto& r : report.rows) {
        os << r.description << ',' << fmt_cell(r.model_time_s, 17) << ','
           << fmt_cell(r.percent, 17) << ',' << fmt_cell(r.gflops, 17) << ','
           << fmt_cell(r.wall_time_s, 17) << ',' << fmt_cell(r.residue, 17)
           << ',' << r.status << "\n";
      }
      break;
    }
    case ReportFormat::Json: {
      nlohmann::json j;
      j["title"] = report.title;
      j["mean_rel_err"] = num_or_null(report.mean_rel_err);
      j["max_rel_err"] = num_or_null(report.max_rel_err);
      j["failed"] = report.failed;
      j["rows"] = nlohmann::json::array();
      for (const auto& r : report.rows) {
        j["rows"].push_back({{"description", r.description},
                             {"model_time_s", num_or_null(r.model_time_s)},
                             {"percent", num_or_null(r.percent)},
                             {"gflops", num_or_null(r.gflops)},
                             {"wall_time_s", num_or_null(r.wall_time_s)},
                             {"residue", num_or_null(r.residue)},
                             {"status", r.status}});
      }
      os << j.dump(2) << "\n";
      break;
    }
  }
  return os.str();
}

BenchReport parse_report_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BenchReport rep;
  rep.title = j.at("title").get<std::string>();
  rep.mean_rel_err = null_or_num(j.at("mean_rel_err"));
  rep.max_rel_err = null_or_num(j.at("max_rel_err"));
  rep.failed = j.at("failed").get<bool>();
  for (const auto& rj : j.at("rows")) {
    BenchRow r;
    r.description = rj.at("description").get<std::string>();
    r.model_time_s = null_or_num(rj.at("model_time_s"));
    r.percent = null_or_num(rj.at("percent"));
    r.gflops = null_or_num(rj.at("gflops"));
    r.wall_time_s = null_or_num(rj.at("wall_time_s"));
    r.residue = null_or_num(rj.at("residue"));
    r.status = rj.at("status").get<std::string>();
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

CalibrationTargets reference_targets() {
  CalibrationTargets t;
  t.m = 192;
  t.n = 256;
  t.k = 4096;
  t.input_s = 0.094648;
  t.device_s = 0.105652;
  t.post_s = 0.005272;
  t.total_s = 0.114114;
  t.service_total_s = 0.158303;
  return t;
}

CalibrationTargets load_targets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open targets file: " + path);
  CalibrationTargets t = reference_targets();
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kv;
    if (!(ls >> kv)) continue;
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("targets file: expected key=value: " + kv);
    }
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "m") t.m = std::stoi(val);
    else if (key == "n") t.n = std::stoi(val);
    else if (key == "k") t.k = std::stoi(val);
    else if (key == "input_s") t.input_s = std::stod(val);
    else if (key == "device_s") t.device_s = std::stod(val);
    else if (key == "post_s") t.post_s = std::stod(val);
    else if (key == "total_s") t.total_s = std::stod(val);
    else if (key == "service_total_s") t.service_total_s = std::stod(val);
    else throw std::invalid_argument("targets file: unknown key: " + key);
  }
  return t;
}

CostParams calibrate_cost_model(const CalibrationTargets& targets,
                                const MeshConfig& mesh, const KernelConfig& kc,
                                const CostParams& base) {
  if (targets.input_s <= 0 || targets.device_s <= 0 || targets.post_s <= 0 ||
      targets.total_s <= 0) {
    throw CalibrationError("calibrate: target times must be positive");
  }
  if (targets.m != kc.m || targets.n != kc.n || targets.k % kc.ksub != 0) {
    throw CalibrationError("calibrate: targets do not match the kernel geometry");
  }
  CostParams p = base;
  const int num_tasks = targets.k / kc.ksub;
  const double in_bytes = double(kc.a_ti_bytes() + kc.b_ti_bytes());
  const double c_bytes = double(kc.c_ti_bytes());

  // Cycles one task costs each core, mirroring the device kernel exactly.
  const double fma_per_k_iter = double(kc.m) * kc.k_per_core() * kc.nsub;
  const double barriers_per_task = 1.0 + double(kc.col_iters()) * kc.cores;
  const double cycles_per_task =
      kc.col_iters() * (kc.cores * fma_per_k_iter / p.fma_per_cycle_per_core +
                        double(kc.m) * kc.nsub) +
      barriers_per_task * double(p.barrier_cycles);
  const double compute_s = num_tasks * cycles_per_task / mesh.clock_hz;

  p.bw_host_write_hc = num_tasks * in_bytes / targets.input_s;

  const double transfer_budget = targets.device_s - compute_s;
  if (transfer_budget <= 0) {
    throw CalibrationError(
        "calibrate: device target is below the pure compute time");
  }
  p.bw_core_hc = (num_tasks * in_bytes + c_bytes) / transfer_budget;
  p.bw_host_read_hc = c_bytes / targets.post_s;

  // Residual of the total row, attributed to per-task host loop overhead.
  const double s = in_bytes / p.bw_host_write_hc;
  const double d = in_bytes / p.bw_core_hc + cycles_per_task / mesh.clock_hz;
  const double d_last = d + c_bytes / p.bw_core_hc;
  const double base_total =
      s + (num_tasks - 1) * std::max(s, d) + d_last + targets.post_s;
  const double overhead_total = targets.total_s - base_total;
  if (overhead_total < -1e-9 * targets.total_s) {
    throw CalibrationError("calibrate: total target below the overlap-law floor");
  }
  p.host_task_overhead_s = std::max(overhead_total, 0.0) / num_tasks;

  if (targets.service_total_s > 0) {
    const double hh_gap = targets.service_total_s - targets.total_s;
    if (hh_gap <= 0) {
      throw CalibrationError("calibrate: service total must exceed direct total");
    }
    const double hh_bytes =
        4.0 * (double(kc.m) * targets.k + double(targets.k) * kc.n +
               2.0 * kc.m * kc.n);
    p.bw_hh = hh_bytes / hh_gap;
  }
  p.validate();
  return p;
}

Precision parse_precision(const std::string& name) {
  if (name == "single") return Precision::Single;
  if (name == "false-double" || name == "false_double")
    return Precision::FalseDouble;
  throw std::invalid_argument("unknown precision: " + name);
}

std::vector<std::pair<Op, Op>> parse_variants(const std::string& spec) {
  static constexpr char kOps[] = {'n', 'c', 't', 'h'};
  std::vector<std::pair<Op, Op>> out;
  if (spec == "all") {
    for (char a : kOps) {
      for (char b : kOps) out.emplace_back(parse_op(a), parse_op(b));
    }
    return out;
  }
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.size() != 2) {
      throw std::invalid_argument("bad variant (want two of n/t/c/h): " + item);
    }
    out.emplace_back(parse_op(item[0]), parse_op(item[1]));
  }
  if (out.empty()) throw std::invalid_argument("empty variant list");
  return out;
}

void fill_uniform(std::mt19937& rng, float* p, std::size_t n) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::size_t i = 0; i < n; ++i) p[i] = dist(rng);
}

void fill_uniform(std::mt19937& rng, double* p, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) p[i] = dist(rng);
}

BenchReport run_kernel_bench(const MeshConfig& mesh_cfg, const CostParams& cost,
                             std::int64_t K, GemmEngine::Mode mode,
                             std::uint64_t seed, const KernelConfig& kc) {
  if (K <= 0 || K % kc.ksub != 0) {
    throw std::invalid_argument("run_kernel_bench: K must be a positive multiple of KSUB");
  }
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
  Matrix<float> a1(kc.m, K, Layout::ColMajor);
  Matrix<float> b1(K, kc.n, Layout::RowMajor);
  Matrix<float> c_out(kc.m, kc.n, Layout::ColMajor);
  fill_uniform(rng, a1.data(), a1.size());
  fill_uniform(rng, b1.data(), b1.size());

  InnerKernelRequest req;
  req.a1 = a1.data();
  req.b1 = b1.data();
  req.k = K;
  req.alpha = 1.0f;
  req.beta = 0.0f;
  req.c_out = c_out.view();

  GemmEngine engine(mesh_cfg, cost, mode, kc);
  const auto wall0 = std::chrono::steady_clock::now();
  TimingBreakdown tb = engine.run_inner(req);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();

  // f64 oracle on the same inputs
  Matrix<double> a_d = cast<double>(a1.cview());
  Matrix<double> c_ref(kc.m, kc.n, Layout::ColMajor);
  Matrix<double> b_d_rm(K, kc.n, Layout::RowMajor);
  for (std::int64_t i = 0; i < K; ++i)
    for (std::int64_t j = 0; j < kc.n; ++j) b_d_rm.at(i, j) = b1.at(i, j);
  ref_gemm<double>(1.0, a_d.cview(), Op::None, b_d_rm.cview(), Op::None, 0.0,
                   c_ref.view());
  Matrix<double> c_d = cast<double>(c_out.cview());
  const double scale =
      gemm_norm_scale(K, 1.0, inf_norm(a_d.cview()), inf_norm(b_d_rm.cview()),
                      0.0, 0.0);
  ErrorReport err = compare<double>(c_d.cview(), c_ref.cview(), scale);

  BenchReport rep;
  rep.title = (mode == GemmEngine::Mode::Inproc)
                  ? "kernel benchmark, in-process (m=" + std::to_string(kc.m) +
                        ", n=" + std::to_string(kc.n) +
                        ", K=" + std::to_string(K) + ")"
                  : "kernel benchmark, via service (m=" + std::to_string(kc.m) +
                        ", n=" + std::to_string(kc.n) +
                        ", K=" + std::to_string(K) + ")";
  const double flops = 2.0 * kc.m * kc.n * double(K);
  auto pct = [&](double t) { return 100.0 * t / tb.total_time; };
  rep.rows.push_back({"Input loading and host preprocessing (*)",
                      tb.input_stage_time, pct(tb.input_stage_time),
                      BenchRow::nan_, BenchRow::nan_, BenchRow::nan_, ""});
  rep.rows.push_back({"Coprocessor work (*)", tb.device_time,
                      pct(tb.device_time), BenchRow::nan_, BenchRow::nan_,
                      BenchRow::nan_, ""});
  rep.rows.push_back({"Host data retrieving and postprocessing", tb.post_time,
                      pct(tb.post_time), BenchRow::nan_, BenchRow::nan_,
                      BenchRow::nan_, ""});
  if (tb.hh_time > 0) {
    rep.rows.push_back({"Interprocess handoff (HH copies)", tb.hh_time,
                        pct(tb.hh_time), BenchRow::nan_, BenchRow::nan_,
                        BenchRow::nan_, ""});
  }
  rep.rows.push_back({"Total sgemm u-kernel", tb.total_time, 100.0,
                      flops / tb.total_time / 1e9, wall, BenchRow::nan_, ""});
  rep.mean_rel_err = err.mean_rel_err;
  rep.max_rel_err = err.max_rel_err;
  return rep;
}

namespace {

char op_char(Op op) { return static_cast<char>(op); }

}  // namespace

BenchReport run_testsuite(const MeshConfig& mesh_cfg, const CostParams& cost,
                          std::int64_t M, std::int64_t N, std::int64_t K,
                          Precision precision,
                          const std::vector<std::pair<Op, Op>>& variants,
                          std::uint64_t seed, const KernelConfig& kc) {
  if (M <= 0 || N <= 0 || K <= 0) {
    throw std::invalid_argument("run_testsuite: dimensions must be positive");
  }
  const bool single = precision == Precision::Single;
  const double threshold =
      single ? kResidueThresholdSingle : kResidueThresholdFalseDouble;
  const char* dt = single ? "sgemm" : "dgemm";
  BenchReport rep;
  rep.title = std::string("testsuite ") + dt + " (m=" + std::to_string(M) +
              ", n=" + std::to_string(N) + ", K=" + std::to_string(K) + ")";

  GemmEngine engine(mesh_cfg, cost, GemmEngine::Mode::Inproc, kc);
  const double flops = 2.0 * double(M) * double(N) * double(K);
  // Oracle results are shared between variants that normalize to the same
  // transpose pair (the data generation is normalization-invariant).
  std::map<std::pair<char, char>, Matrix<double>> oracle_cache;

  for (auto [opA, opB] : variants) {
    const Op na = normalize(opA);
    const Op nb = normalize(opB);
    const std::int64_t a_rows = is_transposed(na) ? K : M;
    const std::int64_t a_cols = is_transposed(na) ? M : K;
    const std::int64_t b_rows = is_transposed(nb) ? N : K;
    const std::int64_t b_cols = is_transposed(nb) ? K : N;

    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    Matrix<double> A(a_rows, a_cols), B(b_rows, b_cols), C(M, N);
    fill_uniform(rng, A.data(), A.size());
    fill_uniform(rng, B.data(), B.size());
    fill_uniform(rng, C.data(), C.size());
    const double alpha = 1.0, beta = 1.0;

    const auto key = std::make_pair(op_char(na), op_char(nb));
    if (!oracle_cache.count(key)) {
      Matrix<double> c_ref(M, N);
      for (std::size_t i = 0; i < C.size(); ++i) c_ref.data()[i] = C.data()[i];
      ref_gemm<double>(alpha, A.cview(), na, B.cview(), nb, beta, c_ref.view());
      oracle_cache.emplace(key, std::move(c_ref));
    }
    const Matrix<double>& c_ref = oracle_cache.at(key);

    engine.reset_accumulated_time();
    const auto wall0 = std::chrono::steady_clock::now();
    Matrix<double> c_test(M, N);
    if (single) {
      Matrix<float> Af = cast<float>(A.cview());
      Matrix<float> Bf = cast<float>(B.cview());
      Matrix<float> Cf = cast<float>(C.cview());
      sgemm(engine, opA, opB, M, N, K, float(alpha), Af.cview(), Bf.cview(),
            float(beta), Cf.view());
      c_test = cast<double>(Cf.cview());
    } else {
      for (std::size_t i = 0; i < C.size(); ++i) c_test.data()[i] = C.data()[i];
      dgemm_false(engine, opA, opB, M, N, K, alpha, A.cview(), B.cview(), beta,
                  c_test.view());
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
            .count();

    const double scale =
        gemm_norm_scale(K, alpha, inf_norm(A.cview(), na),
                        inf_norm(B.cview(), nb), beta, inf_norm(C.cview()));
    ErrorReport err = compare<double>(c_test.cview(), c_ref.cview(), scale);

    BenchRow row;
    row.description = std::string("blis_") + dt + "_" + op_char(opA) +
                      op_char(opB) + "_ccc";
    row.model_time_s = engine.accumulated_model_time();
    row.gflops = flops / row.model_time_s / 1e9;
    row.wall_time_s = wall;
    row.residue = err.normalized_residue;
    row.status = err.normalized_residue <= threshold ? "PASS" : "FAILED";
    if (row.status == "FAILED") rep.failed = true;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace meshgemm
