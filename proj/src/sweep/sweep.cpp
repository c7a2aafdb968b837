#include "twisted/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "twisted/bessel.hpp"
#include "twisted/errors.hpp"
#include "twisted/two_ball.hpp"

namespace twisted::sweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// the closed-form endpoint rows meet their bounds with equality
constexpr double kUlpSlack = 8 * std::numeric_limits<double>::epsilon();

std::string fmt(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

double linspace(double a, double b, int i, int n)
{
  return i == n - 1 ? b : a + (b - a) * i / (n - 1);
}

// Runs body(i) for i in [0, n) on up to `jobs` threads; rethrows the first error.
template <class F>
void parallel_for(int n, int jobs, F body)
{
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error)
            error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

void check_dim(int d)
{
  if (d < 2 || d > 16)
    throw InputError("dimension must lie in [2, 16]");
}

void check_jobs(int jobs)
{
  if (jobs < 1)
    throw InputError("jobs must be at least 1");
}

CurveRow solved_row(const Dimension& dim, double a)
{
  const OptimalPair pair = solve_optimal_pair(dim, a);
  const LowerBounds lb = lower_bounds(dim, a);
  const CurveDerivatives der = pair.symmetric_limit ? symmetric_limit_derivatives(dim) : curve_derivatives(pair);
  return {a, pair.m, pair.lambda_scaled, pair.omega, pair.M, lb.m_lb, lb.lambda_lb, der.dm_dalpha, der.dlambda_dalpha};
}

CurveRow lower_limit_row(const Dimension& dim)
{
  const double lam = single_ball_eigenvalue(dim);
  return {0.0, 0.0, lam, dim.j_lower(), 1.0, 0.0, lam, kNaN, kNaN};
}

CurveRow upper_limit_row(const Dimension& dim)
{
  const LowerBounds lb = lower_bounds(dim, 1.0);
  const CurveDerivatives der = symmetric_limit_derivatives(dim);
  const double omega = dim.j_lower() * std::pow(2.0, 1.0 / dim.d());
  return {1.0, 1.0, symmetric_eigenvalue(dim), omega, 0.5, lb.m_lb, lb.lambda_lb, der.dm_dalpha, der.dlambda_dalpha};
}

const nlohmann::json& field(const nlohmann::json& obj, const char* key)
{
  if (!obj.is_object() || !obj.contains(key))
    throw InputError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

double number(const nlohmann::json& v, const char* what)
{
  if (!v.is_number())
    throw InputError(std::string(what) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw InputError(std::string(what) + " must be finite");
  return x;
}

std::array<double, 2> point(const nlohmann::json& v, const char* what)
{
  if (!v.is_array() || v.size() != 2)
    throw InputError(std::string(what) + " must be a pair of numbers");
  return {number(v[0], what), number(v[1], what)};
}

grid::Shape parse_shape(const nlohmann::json& s)
{
  const nlohmann::json& type = field(s, "type");
  if (!type.is_string())
    throw InputError("shape type must be a string");
  if (type == "disk") {
    const auto c = point(field(s, "center"), "center");
    const double r = number(field(s, "radius"), "radius");
    if (!(r > 0))
      throw InputError("radius must be positive");
    return grid::Disk{c[0], c[1], r};
  }
  if (type == "rect") {
    const auto lo = point(field(s, "min"), "min"), hi = point(field(s, "max"), "max");
    if (!(lo[0] < hi[0] && lo[1] < hi[1]))
      throw InputError("rect min must lie below max");
    return grid::Rect{lo[0], lo[1], hi[0], hi[1]};
  }
  throw InputError("unknown shape type " + type.dump());
}

grid::Vector read_values(const std::filesystem::path& path, std::size_t n)
{
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open values file " + path.string());
  std::vector<double> v;
  for (double x; in >> x;)
    v.push_back(x);
  if (!in.eof())
    throw InputError("non-numeric entry in values file " + path.string());
  if (v.size() != n)
    throw InputError("values file holds " + std::to_string(v.size()) + " entries, domain has " + std::to_string(n) +
                     " interior nodes");
  return Eigen::Map<grid::Vector>(v.data(), Eigen::Index(v.size()));
}

} // namespace

void validate(const CurveRequest& req)
{
  check_dim(req.dim);
  check_jobs(req.jobs);
  if (!(req.alpha_min > 0.0 && req.alpha_max < 1.0 && req.alpha_min < req.alpha_max))
    throw InputError("need 0 < alpha-min < alpha-max < 1");
  if (req.steps < 2)
    throw InputError("steps must be at least 2");
}

std::vector<CurveRow> compute_curve(const CurveRequest& req)
{
  validate(req);
  const Dimension dim(req.dim);
  std::vector<CurveRow> rows(std::size_t(req.steps));
  parallel_for(req.steps, req.jobs, [&](int i) {
    rows[std::size_t(i)] = solved_row(dim, linspace(req.alpha_min, req.alpha_max, i, req.steps));
  });
  if (req.with_limits) {
    rows.insert(rows.begin(), lower_limit_row(dim));
    rows.push_back(upper_limit_row(dim));
  }
  return rows;
}

bool within_bounds(const CurveRow& row)
{
  return row.m >= row.m_lb * (1 - kUlpSlack) && row.lambda >= row.lambda_lb * (1 - kUlpSlack);
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows)
{
  out << "alpha,m,lambda,omega,M,m_lb,lambda_lb,dm_dalpha,dlambda_dalpha\n";
  for (const CurveRow& r : rows)
    out << fmt(r.alpha) << ',' << fmt(r.m) << ',' << fmt(r.lambda) << ',' << fmt(r.omega) << ',' << fmt(r.M) << ','
        << fmt(r.m_lb) << ',' << fmt(r.lambda_lb) << ',' << fmt(r.dm_dalpha) << ',' << fmt(r.dlambda_dalpha) << '\n';
}

void validate(const MCurveRequest& req)
{
  check_dim(req.dim);
  check_jobs(req.jobs);
  if (!(req.alpha > 0.0 && req.alpha <= 1.0))
    throw InputError("alpha must lie in (0, 1]");
  if (!(req.m_min > 0.0 && req.m_max <= 1.0 && req.m_min < req.m_max))
    throw InputError("need 0 < m-min < m-max <= 1");
  if (req.steps < 2)
    throw InputError("steps must be at least 2");
}

std::vector<MCurveRow> compute_mcurve(const MCurveRequest& req)
{
  validate(req);
  const Dimension dim(req.dim);
  std::vector<MCurveRow> rows(std::size_t(req.steps));
  parallel_for(req.steps, req.jobs, [&](int i) {
    const double m = linspace(req.m_min, req.m_max, i, req.steps);
    const FixedRatioEigenvalue r = twisted_eigenvalue_fixed_m(dim, req.alpha, m);
    rows[std::size_t(i)] = {m, r.lambda_scaled, std::string(to_string(r.branch)), upper_bound_f(dim, req.alpha, m)};
  });
  return rows;
}

bool within_bounds(const MCurveRow& row)
{
  return row.lambda <= row.upper_bound_f * (1 + kUlpSlack);
}

void write_mcurve_csv(std::ostream& out, const std::vector<MCurveRow>& rows)
{
  out << "m,lambda,branch,upper_bound_f\n";
  for (const MCurveRow& r : rows)
    out << fmt(r.m) << ',' << fmt(r.lambda) << ',' << r.branch << ',' << fmt(r.upper_bound_f) << '\n';
}

void write_gnuplot(std::ostream& out, const std::string& csv_path, PlotKind kind)
{
  out << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set grid\n";
  if (kind == PlotKind::curve) {
    out << "set multiplot layout 1,2\n"
        << "set xlabel 'alpha'\n"
        << "plot '" << csv_path << "' using 1:2 with lines, '' using 1:6 with lines dt 2\n"
        << "plot '" << csv_path << "' using 1:3 with lines, '' using 1:7 with lines dt 2\n"
        << "unset multiplot\n";
  } else {
    out << "set xlabel 'm'\n"
        << "plot '" << csv_path << "' using 1:2 with lines, '' using 1:4 with lines dt 2\n";
  }
  out << "pause mouse close\n";
}

GridRequest parse_grid_request(std::string_view json_text, const std::filesystem::path& base_dir)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw InputError("grid request must be a JSON object");
  GridRequest req;
  req.h = number(field(doc, "h"), "h");
  if (!(req.h > 0))
    throw InputError("h must be positive");
  const nlohmann::json& shapes = field(doc, "shapes");
  if (!shapes.is_array() || shapes.empty())
    throw InputError("shapes must be a non-empty array");
  for (const auto& s : shapes)
    req.shapes.shapes.push_back(parse_shape(s));

  const nlohmann::json& g = field(doc, "g");
  const nlohmann::json& cls = field(g, "class");
  if (cls == "zero")
    req.g_class = grid::ConstraintClass::zero;
  else if (cls == "constant")
    req.g_class = grid::ConstraintClass::constant;
  else if (cls == "bang_bang")
    req.g_class = grid::ConstraintClass::bang_bang;
  else if (cls == "custom")
    req.g_class = grid::ConstraintClass::custom;
  else
    throw InputError("unknown g class " + cls.dump());
  if (g.contains("alpha"))
    req.alpha = number(g.at("alpha"), "alpha");
  else if (req.g_class == grid::ConstraintClass::bang_bang)
    throw InputError("bang_bang requires alpha");
  if (g.contains("alpha_shapes")) {
    const auto& a = g.at("alpha_shapes");
    if (!a.is_array())
      throw InputError("alpha_shapes must be an array");
    req.alpha_shapes.clear();
    for (const auto& v : a) {
      if (!v.is_number_integer())
        throw InputError("alpha_shapes entries must be integers");
      req.alpha_shapes.push_back(v.get<int>());
    }
  }
  if (g.contains("values_file")) {
    if (!g.at("values_file").is_string())
      throw InputError("values_file must be a string");
    std::filesystem::path p = g.at("values_file").get<std::string>();
    req.values_file = p.is_absolute() ? p : base_dir / p;
  } else if (req.g_class == grid::ConstraintClass::custom) {
    throw InputError("custom g requires values_file");
  }
  return req;
}

GridRecord run_grid(const GridRequest& req)
{
  const grid::GridDomain domain = grid::GridDomain::from_shapes(req.shapes, req.h);
  grid::ConstraintField g;
  switch (req.g_class) {
  case grid::ConstraintClass::zero:
    g = grid::ConstraintField::zero(domain);
    break;
  case grid::ConstraintClass::constant:
    g = grid::ConstraintField::constant(domain, req.alpha);
    break;
  case grid::ConstraintClass::bang_bang:
    g = grid::ConstraintField::bang_bang(domain, req.alpha, req.alpha_shapes);
    break;
  case grid::ConstraintClass::custom:
    g = grid::ConstraintField::custom(read_values(*req.values_file, domain.size()));
    break;
  }
  const auto eigs = grid::dirichlet_eigs(domain, 2);
  const grid::TwistedSolution sol = grid::twisted_eig(domain, g);
  const grid::NodalReport nodal = grid::nodal_report(sol, domain);
  return {sol.lambda, eigs[0].lambda, eigs[1].lambda, sol.xi, nodal.count, domain.area(), sol.iterations};
}

std::string to_json(const GridRecord& rec)
{
  nlohmann::ordered_json j;
  j["lambda"] = rec.lambda;
  j["lambda1"] = rec.lambda1;
  j["lambda2"] = rec.lambda2;
  j["xi"] = rec.xi;
  j["nodal_count"] = rec.nodal_count;
  j["area"] = rec.area;
  j["iterations"] = rec.iterations;
  return j.dump();
}

} // namespace twisted::sweep
