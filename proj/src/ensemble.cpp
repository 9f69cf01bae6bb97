#include "spme/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "spme/conditions.hpp"
#include "spme/errors.hpp"

namespace spme {

namespace observables {

Observable h_norm_sq() {
  return {"h_norm_sq", [](double, const Field& x) { return spme::h_norm_sq(x.domain(), x.coeffs()); }};
}

Observable mode(std::size_t k) {
  return {"mode_" + std::to_string(k + 1), [k](double, const Field& x) { return x.coeffs()[k]; }};
}

Observable h_projection(std::size_t k) {
  return {"h_proj_" + std::to_string(k + 1),
          [k](double, const Field& x) { return x.coeffs()[k] / x.domain().eigenvalue(k); }};
}

Observable r_functional(orlicz::YoungFunction n) {
  return {"R", [n = std::move(n)](double, const Field& x) { return spme::r_functional(n, x); }};
}

Observable modular(orlicz::YoungFunction n) {
  return {"modular", [n = std::move(n)](double, const Field& x) {
            return orlicz::modular(x.values(), n, x.domain().measure());
          }};
}

Observable max_norm() {
  return {"max_norm", [](double, const Field& x) {
            double m = 0.0;
            for (double v : x.values()) m = std::max(m, std::abs(v));
            return m;
          }};
}

PairObservable diff_h_norm_sq() {
  return {"diff_h_norm_sq", [](double, const Field& x, const Field& y) {
            std::vector<double> d(x.size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.coeffs()[i] - y.coeffs()[i];
            return spme::h_norm_sq(x.domain(), d);
          }};
}

}  // namespace observables

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::vector<std::vector<double>> run_paths(
    std::size_t n_paths, unsigned threads,
    const std::function<std::vector<double>(std::size_t)>& work) {
  std::vector<std::vector<double>> out(n_paths);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_paths)));
  if (threads <= 1) {
    for (std::size_t p = 0; p < n_paths; ++p) out[p] = work(p);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t p = next.fetch_add(1);
        if (p >= n_paths) return;
        try {
          out[p] = work(p);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n_paths);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<double> PathData::column(std::size_t time, std::size_t obs) const {
  std::vector<double> c(values.size());
  for (std::size_t p = 0; p < values.size(); ++p) c[p] = at(p, time, obs);
  return c;
}

StatTable summarize(const PathData& data) {
  StatTable st;
  st.times = data.times;
  st.names = data.names;
  st.n_paths = data.n_paths();
  const auto n = static_cast<double>(st.n_paths);
  const std::size_t nt = data.times.size();
  const std::size_t no = data.names.size();
  st.mean.assign(nt, std::vector<double>(no, 0.0));
  st.var = st.mean;
  st.se = st.mean;
  if (st.n_paths == 0) return st;
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t o = 0; o < no; ++o) {
      auto col = data.column(t, o);
      const double mean = pairwise_sum(col) / n;
      for (double& x : col) x = (x - mean) * (x - mean);
      const double var = st.n_paths > 1 ? pairwise_sum(col) / (n - 1.0) : 0.0;
      st.mean[t][o] = mean;
      st.var[t][o] = var;
      st.se[t][o] = std::sqrt(var / n);
    }
  }
  return st;
}

CsvTable StatTable::to_csv() const {
  CsvTable t;
  t.header.push_back("t");
  for (const auto& n : names) {
    t.header.push_back(n + "_mean");
    t.header.push_back(n + "_se");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row{times[i]};
    for (std::size_t o = 0; o < names.size(); ++o) {
      row.push_back(mean[i][o]);
      row.push_back(se[i][o]);
    }
    t.add_row(std::move(row));
  }
  return t;
}

PathData sample_paths(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::size_t n_paths, const std::vector<Observable>& obs, unsigned threads,
                      std::uint64_t path_offset) {
  PathData d;
  d.times = sys.save_times();
  for (const auto& o : obs) d.names.push_back(o.name);
  const std::size_t width = d.times.size() * obs.size();
  d.values = run_paths(n_paths, threads, [&](std::size_t p) {
    std::vector<double> row(width);
    simulate_observe(sys, x0, master_seed, path_offset + p,
                     [&](std::size_t i, double t, const Field& x) {
                       for (std::size_t o = 0; o < obs.size(); ++o) {
                         row[i * obs.size() + o] = obs[o].fn(t, x);
                       }
                     });
    return row;
  });
  return d;
}

PathData sample_pairs(const GalerkinSystem& sys, const Field& x0, const Field& y0,
                      std::uint64_t master_seed, std::size_t n_paths,
                      const std::vector<PairObservable>& obs, unsigned threads) {
  PathData d;
  d.times = sys.save_times();
  for (const auto& o : obs) d.names.push_back(o.name);
  const std::size_t width = d.times.size() * obs.size();
  d.values = run_paths(n_paths, threads, [&](std::size_t p) {
    std::vector<double> row(width);
    simulate_pair_observe(sys, x0, y0, master_seed, p,
                          [&](std::size_t i, double t, const Field& x, const Field& y) {
                            for (std::size_t o = 0; o < obs.size(); ++o) {
                              row[i * obs.size() + o] = obs[o].fn(t, x, y);
                            }
                          });
    return row;
  });
  return d;
}

StatTable monte_carlo(const GalerkinSystem& sys, const Field& x0, std::uint64_t master_seed,
                      std::size_t n_paths, const std::vector<Observable>& obs, unsigned threads) {
  if (n_paths < 2) throw PreconditionError("monte_carlo: ensemble_size must be >= 2");
  return summarize(sample_paths(sys, x0, master_seed, n_paths, obs, threads));
}

}  // namespace spme
