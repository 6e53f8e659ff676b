// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Production geometry (16 cores, 192x256 tiles, KSUB=64)
// unless a criterion is explicitly about desk-scale semantics.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "meshgemm/bench.hpp"

using namespace meshgemm;

namespace {

struct Checker {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

MeshConfig desk_mesh() {
  MeshConfig cfg;
  cfg.cores = 4;
  cfg.grid_rows = 2;
  cfg.grid_cols = 2;
  return cfg;
}

KernelConfig desk_kernel() {
  KernelConfig kc;
  kc.m = 32;
  kc.n = 32;
  kc.ksub = 8;
  kc.nsub = 4;
  kc.cores = 4;
  return kc;
}

template <typename T>
Matrix<T> random_matrix(std::int64_t r, std::int64_t c, std::uint64_t seed) {
  Matrix<T> m(r, c);
  std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
  fill_uniform(rng, m.data(), m.size());
  return m;
}

template <typename T>
double max_abs(const Matrix<T>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    best = std::max(best, std::abs(double(m.data()[i])));
  return best;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------

// 1. The K=4096 kernel run stays within the platform accuracy envelope.
Checker criterion1() {
  Checker c;
  BenchReport rep = run_kernel_bench({}, {}, 4096, GemmEngine::Mode::Inproc, 1);
  c.require(rep.mean_rel_err <= 2e-7,
            "mean rel err " + fmt(rep.mean_rel_err) + " > 2e-7");
  c.require(rep.max_rel_err <= 2e-6,
            "max rel err " + fmt(rep.max_rel_err) + " > 2e-6");
  return c;
}

// 2. All 16 transpose variants at 768^3 meet the single-precision residue
//    threshold, conjugating variants are bit-identical to their real
//    aliases, and a dense edge-size sweep stays within an a priori bound.
Checker criterion2() {
  Checker c;
  const std::int64_t M = 768, N = 768, K = 768;
  static constexpr char kOps[] = {'n', 'c', 't', 'h'};
  GemmEngine engine({}, {}, GemmEngine::Mode::Inproc);

  std::map<std::string, Matrix<float>> results;
  std::map<std::string, Matrix<double>> oracles;
  for (char ca : kOps) {
    for (char cb : kOps) {
      const Op opA = parse_op(ca), opB = parse_op(cb);
      const Op na = normalize(opA), nb = normalize(opB);
      const std::string variant{ca, cb};
      const std::string norm_variant{char(na), char(nb)};

      // identical data for variants that normalize to the same pair
      const std::int64_t a_r = is_transposed(na) ? K : M;
      const std::int64_t a_c = is_transposed(na) ? M : K;
      const std::int64_t b_r = is_transposed(nb) ? N : K;
      const std::int64_t b_c = is_transposed(nb) ? K : N;
      std::mt19937 rng(2026);
      Matrix<float> A(a_r, a_c), B(b_r, b_c), C0(M, N);
      fill_uniform(rng, A.data(), A.size());
      fill_uniform(rng, B.data(), B.size());
      fill_uniform(rng, C0.data(), C0.size());

      Matrix<float> C = C0;
      sgemm(engine, opA, opB, M, N, K, 1.0f, A.cview(), B.cview(), 1.0f,
            C.view());

      if (!oracles.count(norm_variant)) {
        Matrix<double> ref = cast<double>(C0.cview());
        Matrix<double> Ad = cast<double>(A.cview());
        Matrix<double> Bd = cast<double>(B.cview());
        ref_gemm<double>(1.0, Ad.cview(), na, Bd.cview(), nb, 1.0, ref.view());
        oracles.emplace(norm_variant, std::move(ref));
      }
      const double scale = gemm_norm_scale(
          K, 1.0, inf_norm(A.cview(), na), inf_norm(B.cview(), nb), 1.0,
          inf_norm(C0.cview()));
      Matrix<double> got = cast<double>(C.cview());
      const double residue =
          compare<double>(got.cview(), oracles.at(norm_variant).cview(), scale)
              .normalized_residue;
      c.require(residue <= kResidueThresholdSingle,
                "variant " + variant + " residue " + fmt(residue) + " > 1e-6");
      results.emplace(variant, std::move(C));
    }
  }
  // conjugating aliases must be bit-identical, not just close
  for (char ca : kOps) {
    for (char cb : kOps) {
      const std::string variant{ca, cb};
      const std::string alias{char(normalize(parse_op(ca))),
                              char(normalize(parse_op(cb)))};
      if (variant == alias) continue;
      const auto& x = results.at(variant);
      const auto& y = results.at(alias);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x.data()[i] != y.data()[i]) {
          c.require(false, "variant " + variant + " differs bitwise from " +
                               alias);
          break;
        }
      }
    }
  }

  // edge sweep across awkward shapes, against an a priori error bound
  const std::vector<std::int64_t> sizes = {1,   37,  100, 129, 191,
                                           192, 193, 255, 256, 257};
  const float alpha = 1.25f, beta = -0.5f;
  std::uint64_t seed = 1000;
  for (std::int64_t m : sizes) {
    for (std::int64_t n : sizes) {
      for (std::int64_t k : sizes) {
        auto A = random_matrix<float>(m, k, seed++);
        auto B = random_matrix<float>(k, n, seed++);
        auto C0 = random_matrix<float>(m, n, seed++);
        Matrix<float> C = C0;
        sgemm(engine, Op::None, Op::None, m, n, k, alpha, A.cview(), B.cview(),
              beta, C.view());

        Matrix<double> ref = cast<double>(C0.cview());
        Matrix<double> Ad = cast<double>(A.cview());
        Matrix<double> Bd = cast<double>(B.cview());
        ref_gemm<double>(alpha, Ad.cview(), Op::None, Bd.cview(), Op::None,
                         beta, ref.view());

        const std::int64_t padded_k = (k + 63) / 64 * 64;
        const double bound =
            16.0 * kEpsSingle *
            (double(padded_k) * std::abs(alpha) * max_abs(A) * max_abs(B) +
             std::abs(beta) * max_abs(C0));
        double worst = 0.0;
        for (std::int64_t j = 0; j < n; ++j) {
          for (std::int64_t i = 0; i < m; ++i) {
            worst = std::max(worst,
                             std::abs(double(C.at(i, j)) - ref.at(i, j)));
          }
        }
        c.require(worst <= bound, "edge case m=" + std::to_string(m) +
                                      " n=" + std::to_string(n) +
                                      " k=" + std::to_string(k) + ": err " +
                                      fmt(worst) + " > bound " + fmt(bound));
      }
    }
  }
  return c;
}

// 3. The false-double interface is bit-exactly the downcast/sgemm/upcast
//    composition, and at 768^3 it meets the tighter residue threshold.
Checker criterion3() {
  Checker c;
  GemmEngine desk(desk_mesh(), {}, GemmEngine::Mode::Inproc, desk_kernel());
  for (int inst = 0; inst < 20; ++inst) {
    std::mt19937 shape_rng(500 + inst);
    const std::int64_t m = 1 + shape_rng() % 64;
    const std::int64_t n = 1 + shape_rng() % 64;
    const std::int64_t k = 1 + shape_rng() % 48;
    auto A = random_matrix<double>(m, k, 600 + inst);
    auto B = random_matrix<double>(k, n, 700 + inst);
    auto C0 = random_matrix<double>(m, n, 800 + inst);

    Matrix<double> C = C0;
    dgemm_false(desk, Op::None, Op::None, m, n, k, 0.75, A.cview(), B.cview(),
                1.25, C.view());

    Matrix<float> Af = cast<float>(A.cview());
    Matrix<float> Bf = cast<float>(B.cview());
    Matrix<float> Cf = cast<float>(C0.cview());
    sgemm(desk, Op::None, Op::None, m, n, k, 0.75f, Af.cview(), Bf.cview(),
          1.25f, Cf.view());
    for (std::int64_t j = 0; j < n && c.ok; ++j) {
      for (std::int64_t i = 0; i < m; ++i) {
        if (C.at(i, j) != double(Cf.at(i, j))) {
          c.require(false, "instance " + std::to_string(inst) +
                               " is not bit-identical to the cast composition");
          break;
        }
      }
    }
  }

  BenchReport rep = run_testsuite({}, {}, 768, 768, 768,
                                  Precision::FalseDouble,
                                  parse_variants("nn"), 2026);
  c.require(!rep.failed && rep.rows[0].residue < kResidueThresholdFalseDouble,
            "768^3 false-double residue " + fmt(rep.rows[0].residue) +
                " >= 1e-7");
  return c;
}

// 4. On-chip pipeline semantics: block ownership, command linearity, and
//    writeback placement (desk scale, checked against the region contents).
Checker criterion4() {
  Checker c;
  // ownership: each K iteration assigns every block exactly one owner, and
  // the final iteration lands on the computing core itself
  for (int cores : {4, 16}) {
    for (int k = 0; k < cores; ++k) {
      std::set<int> owners;
      for (int j = 0; j < cores; ++j)
        owners.insert(DeviceKernel::dest_core(j, k, cores));
      c.require(int(owners.size()) == cores,
                "dest mapping not a permutation at iteration " +
                    std::to_string(k));
    }
    for (int j = 0; j < cores; ++j) {
      c.require(DeviceKernel::dest_core(j, cores - 1, cores) == j,
                "final iteration does not own its block");
    }
  }

  const KernelConfig kc = desk_kernel();
  auto stage = [&](Mesh& mesh, int sel, const Matrix<float>& a,
                   const Matrix<float>& b) {
    auto a_ti = mesh.hc_f32(sel ? "a1" : "a0");
    auto b_ti = mesh.hc_f32(sel ? "b1" : "b0");
    std::copy(a.data(), a.data() + a.size(), a_ti.begin());
    std::copy(b.data(), b.data() + b.size(), b_ti.begin());
  };
  auto run = [&](Mesh& mesh, DeviceKernel& dev, int cmd, int sel) {
    write_control(mesh, {std::uint32_t(cmd), std::uint32_t(sel), 0});
    dev.run_task();
  };
  auto read_c = [&](Mesh& mesh) {
    Matrix<float> out(kc.m, kc.n);
    auto span = mesh.hc_f32("c");
    std::copy(span.begin(), span.begin() + out.size(), out.data());
    return out;
  };

  std::vector<Matrix<float>> as, bs;
  for (int t = 0; t < 3; ++t) {
    as.push_back(random_matrix<float>(kc.m, kc.ksub, 900 + t));
    Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
    std::mt19937 rng(950 + t);
    fill_uniform(rng, b.data(), b.size());
    bs.push_back(std::move(b));
  }

  // single-task products, for the linearity checks below
  std::vector<Matrix<float>> parts;
  for (int t = 0; t < 3; ++t) {
    Mesh m2(desk_mesh(), {});
    DeviceKernel d2(m2, kc);
    stage(m2, 0, as[t], bs[t]);
    run(m2, d2, 3, 0);
    parts.push_back(read_c(m2));
  }

  // command linearity: every documented schedule accumulates exactly the
  // sum of its single-task products, in task order
  Mesh chain_mesh(desk_mesh(), {});
  DeviceKernel chain_dev(chain_mesh, kc);
  for (const std::vector<int>& cmds :
       {std::vector<int>{3}, std::vector<int>{0, 2},
        std::vector<int>{0, 1, 2}}) {
    for (int t = 0; t < int(cmds.size()); ++t) {
      stage(chain_mesh, t % 2, as[t], bs[t]);
      run(chain_mesh, chain_dev, cmds[t], t % 2);
    }
    Matrix<float> chained = read_c(chain_mesh);
    Matrix<float> summed(kc.m, kc.n);
    for (int t = 0; t < int(cmds.size()); ++t) {
      for (std::size_t i = 0; i < summed.size(); ++i)
        summed.data()[i] += parts[t].data()[i];
    }
    for (std::size_t i = 0; i < summed.size(); ++i) {
      if (chained.data()[i] != summed.data()[i]) {
        c.require(false, "a " + std::to_string(cmds.size()) +
                             "-task schedule differs from the sum of its "
                             "single tasks");
        break;
      }
    }
  }

  // writeback placement: c_ti columns [j*cpc, (j+1)*cpc) come from core j
  auto c_ti = chain_mesh.hc_f32("c");
  const int cpc = kc.cols_per_core();
  for (int j = 0; j < kc.cores; ++j) {
    auto res2 = chain_mesh.region_f32(j, DeviceKernel::kRegionRes2);
    for (std::size_t i = 0; i < std::size_t(cpc) * kc.m; ++i) {
      if (c_ti[std::size_t(j) * cpc * kc.m + i] != res2[i]) {
        c.require(false, "writeback misplaced for core " + std::to_string(j));
        break;
      }
    }
  }
  return c;
}

// 5. The production memory footprint fits the 32 KB scratchpads with
//    exactly 2 KB headroom; anything larger faults.
Checker criterion5() {
  Checker c;
  Mesh mesh({}, {});
  DeviceKernel dev(mesh, {});
  for (int j = 0; j < 16; ++j) {
    std::uint32_t used = 0;
    for (const char* name : {"CODE", "A", "B", "RES1", "RES2"}) {
      c.require(mesh.has_region(j, name),
                std::string("missing region ") + name);
      used += mesh.region(j, name).length;
    }
    c.require(used == 30720, "core " + std::to_string(j) + " uses " +
                                 std::to_string(used) + " bytes, not 30720");
  }
  bool faulted = false;
  try {
    mesh.allocate_region(0, "too_big", 2049);
  } catch (const CapacityExceeded&) {
    faulted = true;
  }
  c.require(faulted, "a 2049-byte over-allocation did not fault");
  try {
    mesh.allocate_region(0, "headroom", 2048);
  } catch (const SimFault&) {
    c.require(false, "the 2048-byte headroom allocation faulted");
  }
  return c;
}

// 6. Calibration reproduces the platform's measured breakdown: the stage
//    shares, the direct GFLOPS, and the service-mode totals.
Checker criterion6() {
  Checker c;
  const CalibrationTargets targets = reference_targets();
  const CostParams fitted = calibrate_cost_model(targets);

  BenchReport rep =
      run_kernel_bench({}, fitted, 4096, GemmEngine::Mode::Inproc, 1);
  const double shares[3] = {82.9, 92.6, 4.6};
  for (int i = 0; i < 3; ++i) {
    c.require(std::abs(rep.rows[i].percent - shares[i]) <= 5.0,
              "stage share " + fmt(rep.rows[i].percent) + "% vs expected " +
                  fmt(shares[i]) + "%");
  }
  c.require(std::abs(rep.rows[3].gflops - 3.529) <= 0.1 * 3.529,
            "direct GFLOPS " + fmt(rep.rows[3].gflops) + " vs 3.529");

  BenchReport svc =
      run_kernel_bench({}, fitted, 4096, GemmEngine::Mode::Service, 1);
  const double svc_total = svc.rows.back().model_time_s;
  c.require(std::abs(svc_total - 0.158303) <= 0.05 * 0.158303,
            "service total " + fmt(svc_total) + " vs 0.158303");
  c.require(std::abs(svc.rows.back().gflops - 2.543) <= 0.1 * 2.543,
            "service GFLOPS " + fmt(svc.rows.back().gflops) + " vs 2.543");
  return c;
}

// 7. The output ratio or(K) = post/total is non-increasing in K and under
//    10% at K=4096.
Checker criterion7() {
  Checker c;
  double prev = 1.0;
  double last = 1.0;
  for (std::int64_t K : {256, 512, 1024, 2048, 4096}) {
    Mesh mesh({}, {});
    InnerKernel inner(mesh);
    auto a1 = random_matrix<float>(192, K, 40 + K);
    Matrix<float> b1(K, 256, Layout::RowMajor);
    std::mt19937 rng(unsigned(50 + K));
    fill_uniform(rng, b1.data(), b1.size());
    Matrix<float> c_out(192, 256);
    InnerKernelRequest req;
    req.a1 = a1.data();
    req.b1 = b1.data();
    req.k = K;
    req.c_out = c_out.view();
    TimingBreakdown tb = inner.run(req);
    c.require(tb.or_ratio <= prev + 1e-12,
              "or(K) increased at K=" + std::to_string(K));
    prev = tb.or_ratio;
    last = tb.or_ratio;
  }
  c.require(last < 0.1, "or(4096) = " + fmt(last) + " >= 0.1");
  return c;
}

// 8. Determinism: identical runs are bit- and ledger-identical, and the
//    service transport changes nothing numerically.
Checker criterion8() {
  Checker c;
  const std::int64_t K = 1024;
  Matrix<float> outs[2];
  CycleLedger ledgers[2];
  for (int r = 0; r < 2; ++r) {
    GemmEngine engine({}, {}, GemmEngine::Mode::Inproc);
    auto a1 = random_matrix<float>(192, K, 77);
    Matrix<float> b1(K, 256, Layout::RowMajor);
    std::mt19937 rng(78);
    fill_uniform(rng, b1.data(), b1.size());
    Matrix<float> c_out(192, 256);
    InnerKernelRequest req;
    req.a1 = a1.data();
    req.b1 = b1.data();
    req.k = K;
    req.c_out = c_out.view();
    engine.run_inner(req);
    outs[r] = c_out;
    ledgers[r] = engine.mesh().ledger();
  }
  c.require(ledgers[0] == ledgers[1], "ledgers differ between repeat runs");
  for (std::size_t i = 0; i < outs[0].size(); ++i) {
    if (outs[0].data()[i] != outs[1].data()[i]) {
      c.require(false, "repeat runs are not bit-identical");
      break;
    }
  }

  // service transport transparency at production scale
  Matrix<float> svc_out(192, 256);
  {
    GemmEngine engine({}, {}, GemmEngine::Mode::Service);
    auto a1 = random_matrix<float>(192, K, 77);
    Matrix<float> b1(K, 256, Layout::RowMajor);
    std::mt19937 rng(78);
    fill_uniform(rng, b1.data(), b1.size());
    InnerKernelRequest req;
    req.a1 = a1.data();
    req.b1 = b1.data();
    req.k = K;
    req.c_out = svc_out.view();
    engine.run_inner(req);
  }
  for (std::size_t i = 0; i < outs[0].size(); ++i) {
    if (outs[0].data()[i] != svc_out.data()[i]) {
      c.require(false, "service result differs bitwise from in-process");
      break;
    }
  }
  return c;
}

// 9. FLOP conservation: the ledger counts exactly 2*m*n*K per inner run.
Checker criterion9() {
  Checker c;
  for (std::int64_t K : {64, 320, 1024}) {
    Mesh mesh({}, {});
    InnerKernel inner(mesh);
    auto a1 = random_matrix<float>(192, K, 99);
    Matrix<float> b1(K, 256, Layout::RowMajor);
    std::mt19937 rng(unsigned(100 + K));
    fill_uniform(rng, b1.data(), b1.size());
    Matrix<float> c_out(192, 256);
    InnerKernelRequest req;
    req.a1 = a1.data();
    req.b1 = b1.data();
    req.k = K;
    req.c_out = c_out.view();
    inner.run(req);
    const std::uint64_t want = 2ull * 192 * 256 * std::uint64_t(K);
    c.require(mesh.ledger().flop_count == want,
              "K=" + std::to_string(K) + ": " +
                  std::to_string(mesh.ledger().flop_count) + " flops, want " +
                  std::to_string(want));
  }
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* what;
    std::function<Checker()> fn;
  };
  const Entry entries[] = {
      {"K=4096 kernel accuracy envelope", criterion1},
      {"16 variants at 768^3 + conjugate aliasing + edge-shape sweep",
       criterion2},
      {"false-double bit-exactness and 768^3 residue", criterion3},
      {"pipeline ownership, command linearity, writeback placement",
       criterion4},
      {"32 KB scratchpad budget with 2 KB headroom", criterion5},
      {"calibrated timing shares and GFLOPS", criterion6},
      {"output ratio monotone in K and < 0.1 at K=4096", criterion7},
      {"bitwise determinism and service transparency", criterion8},
      {"exact FLOP conservation", criterion9},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    Checker result;
    try {
      result = e.fn();
    } catch (const std::exception& ex) {
      result.ok = false;
      result.detail = std::string("exception: ") + ex.what();
    }
    if (result.ok) {
      std::printf("criterion %d: PASS - %s\n", idx, e.what);
    } else {
      std::printf("criterion %d: FAIL - %s (%s)\n", idx, e.what,
                  result.detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
