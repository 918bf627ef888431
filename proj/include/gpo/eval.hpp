#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gpo/orderings.hpp"
#include "gpo/policy_net.hpp"
#include "gpo/sparsity.hpp"
#include "gpo/symbolic.hpp"
#include "gpo/trainer.hpp"

namespace gpo {

/// FIR = (nnz(L + U - I) - nnz(A)) / nnz(A) under the symbolic Cholesky
/// model, i.e. 2 |fill| / nnz_sym(A).
inline double fill_in_ratio(std::size_t fill, SparsityPattern const& p)
{
  return 2.0 * static_cast<double>(fill) / static_cast<double>(nnz_sym(p));
}

inline double fill_in_ratio(SparsityPattern const& p, Ordering const& ord)
{
  return fill_in_ratio(symbolic_factorize(p, ord).fill.size(), p);
}

enum class Method { natural, random, mindeg, gpo };

inline std::string to_string(Method m)
{
  switch (m) {
  case Method::natural: return "natural";
  case Method::random: return "random";
  case Method::mindeg: return "mindeg";
  case Method::gpo: return "gpo";
  }
  return "?";
}

inline Method method_from_string(std::string const& s)
{
  if (s == "natural") return Method::natural;
  if (s == "random") return Method::random;
  if (s == "mindeg") return Method::mindeg;
  if (s == "gpo") return Method::gpo;
  throw validation_error("unknown method '" + s + "'");
}

/// Greedy inference: argmax at every step, lowest id on ties.
inline Ordering greedy_policy_order(PolicyValueNet const& net, SparsityPattern const& p)
{
  std::mt19937_64 unused(0);
  return rollout(net, p, unused, ActionMode::greedy, false).ordering;
}

/// Ordering for one method. `net` must be set for Method::gpo.
template <class Rng>
Ordering compute_ordering(Method m, SparsityPattern const& p, PolicyValueNet const* net, Rng& rng)
{
  switch (m) {
  case Method::natural: return natural_order(p);
  case Method::random: return random_order(p, rng);
  case Method::mindeg: return min_degree_order(p);
  case Method::gpo:
    if (net == nullptr) {
      throw validation_error("method gpo requires a model");
    }
    return greedy_policy_order(*net, p);
  }
  throw validation_error("unknown method");
}

struct EvalRow {
  std::string matrix;
  std::string method;
  node_t n = 0;
  std::size_t nnz = 0;       // nnz_sym(A)
  std::size_t fill = 0;      // |F|
  std::size_t nnz_factor = 0;  // nnz(L + U - I) = nnz + 2 |F|
  double fir = 0.0;
  std::string error;         // non-empty for failed cells

  bool ok() const noexcept { return error.empty(); }
};

struct MethodSummary {
  std::string method;
  double mean_fir = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<MethodSummary> summary;

  std::size_t error_count() const
  {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](EvalRow const& r) { return !r.ok(); }));
  }
};

inline EvalRow evaluate_cell(std::string matrix, Method m, SparsityPattern const& p, Ordering const& ord)
{
  EvalRow row;
  row.matrix = std::move(matrix);
  row.method = to_string(m);
  row.n = p.size();
  row.nnz = nnz_sym(p);
  row.fill = symbolic_factorize(p, ord).fill.size();
  row.nnz_factor = row.nnz + 2 * row.fill;
  row.fir = fill_in_ratio(row.fill, p);
  return row;
}

inline void summarize(EvalReport& report, std::vector<Method> const& methods)
{
  report.summary.clear();
  for (auto m : methods) {
    MethodSummary s;
    s.method = to_string(m);
    for (auto const& r : report.rows) {
      if (r.ok() && r.method == s.method) {
        s.mean_fir += r.fir;
        ++s.count;
      }
    }
    if (s.count > 0) {
      s.mean_fir /= static_cast<double>(s.count);
    }
    report.summary.push_back(s);
  }
}

/// Evaluates every matrix x method cell. Failures (unreadable matrix,
/// missing model) become error rows; the run continues.
inline EvalReport run_benchmark(std::vector<std::string> matrix_paths, std::vector<Method> const& methods,
                                std::optional<std::string> const& model_path, std::uint64_t seed)
{
  std::sort(matrix_paths.begin(), matrix_paths.end());
  std::optional<PolicyValueNet> net;
  std::string model_error;
  bool const wants_model =
      std::find(methods.begin(), methods.end(), Method::gpo) != methods.end();
  if (wants_model) {
    if (!model_path) {
      model_error = "no model given for method gpo";
    } else {
      std::ifstream in(*model_path);
      if (!in) {
        model_error = "cannot open model " + *model_path;
      } else {
        try {
          net = load_checkpoint(in);
        } catch (std::exception const& e) {
          model_error = e.what();
        }
      }
    }
  }

  EvalReport report;
  for (std::size_t mi = 0; mi < matrix_paths.size(); ++mi) {
    auto const& path = matrix_paths[mi];
    std::optional<SparsityPattern> pattern;
    std::string load_error;
    {
      std::ifstream in(path);
      if (!in) {
        load_error = "cannot open file";
      } else {
        try {
          pattern = load_matrix_market(in);
        } catch (std::exception const& e) {
          load_error = e.what();
        }
      }
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(mi)};
    std::mt19937_64 rng(seq);
    for (auto m : methods) {
      EvalRow row;
      row.matrix = path;
      row.method = to_string(m);
      if (!pattern) {
        row.error = load_error;
      } else if (m == Method::gpo && !net) {
        row.error = model_error;
      } else {
        try {
          auto const ord = compute_ordering(m, *pattern, net ? &*net : nullptr, rng);
          row = evaluate_cell(path, m, *pattern, ord);
        } catch (std::exception const& e) {
          row.error = e.what();
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  summarize(report, methods);
  return report;
}

namespace detail {

inline std::string format_double(double v)
{
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_safe(std::string s)
{
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

} // namespace detail

/// `matrix,method,n,nnz,fill,fir` rows, then a blank line and a
/// `method,mean_fir,count` summary block. Error rows leave the numeric
/// columns empty and carry `ERROR: <message>` in the fir column.
inline void write_report_csv(std::ostream& out, EvalReport const& report)
{
  out << "matrix,method,n,nnz,fill,fir\n";
  for (auto const& r : report.rows) {
    out << detail::csv_safe(r.matrix) << ',' << r.method << ',';
    if (r.ok()) {
      out << r.n << ',' << r.nnz << ',' << r.fill << ',' << detail::format_double(r.fir) << '\n';
    } else {
      out << ",,,ERROR: " << detail::csv_safe(r.error) << '\n';
    }
  }
  out << "\nmethod,mean_fir,count\n";
  for (auto const& s : report.summary) {
    out << s.method << ',' << detail::format_double(s.mean_fir) << ',' << s.count << '\n';
  }
}

} // namespace gpo
