// twisted_sweep: curves, single grid runs and verification suites.
//
// Exit codes: 0 success, 1 verification or solver failure, 2 usage or input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "twisted/errors.hpp"
#include "twisted/sweep.hpp"

namespace {

using namespace twisted;
using namespace twisted::sweep;

constexpr int kOk = 0, kFailure = 1, kUsage = 2;

struct Output {
  std::string path;
  bool gnuplot = false;
};

// Writes via `emit` to the --out file or stdout, plus the optional plot script.
template <class F>
int write_output(const Output& o, PlotKind kind, F emit)
{
  if (o.gnuplot && o.path.empty()) {
    std::cerr << "error: --gnuplot requires --out\n";
    return kUsage;
  }
  if (o.path.empty()) {
    emit(std::cout);
    return kOk;
  }
  std::ofstream f(o.path);
  if (!f) {
    std::cerr << "error: cannot write " << o.path << "\n";
    return kUsage;
  }
  emit(f);
  if (o.gnuplot) {
    std::ofstream gp(o.path + ".gp");
    write_gnuplot(gp, o.path, kind);
  }
  return kOk;
}

int cmd_curve(const CurveRequest& req, const Output& o)
{
  const std::vector<CurveRow> rows = compute_curve(req);
  const int rc = write_output(o, PlotKind::curve, [&](std::ostream& out) { write_curve_csv(out, rows); });
  if (rc != kOk)
    return rc;
  for (const CurveRow& r : rows)
    if (!within_bounds(r)) {
      std::fprintf(stderr, "bound violated at alpha=%.12e\n", r.alpha);
      return kFailure;
    }
  return kOk;
}

int cmd_mcurve(const MCurveRequest& req, const Output& o)
{
  const std::vector<MCurveRow> rows = compute_mcurve(req);
  const int rc = write_output(o, PlotKind::mcurve, [&](std::ostream& out) { write_mcurve_csv(out, rows); });
  if (rc != kOk)
    return rc;
  for (const MCurveRow& r : rows)
    if (!within_bounds(r)) {
      std::fprintf(stderr, "upper bound violated at m=%.12e\n", r.m);
      return kFailure;
    }
  return kOk;
}

int cmd_grid(const std::string& request_path)
{
  std::ifstream in(request_path);
  if (!in) {
    std::cerr << "error: cannot read " << request_path << "\n";
    return kUsage;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const GridRequest req = parse_grid_request(buf.str(), std::filesystem::path(request_path).parent_path());
  std::cout << to_json(run_grid(req)) << "\n";
  return kOk;
}

int cmd_verify(const std::string& suite)
{
  const std::vector<Check> checks = run_verify(suite);
  write_report(std::cout, checks);
  for (const Check& c : checks)
    if (!c.pass)
      return kFailure;
  return kOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Optimal two-ball twisted eigenvalues: sweeps, grid runs, verification"};
  app.require_subcommand(1);

  CurveRequest curve;
  Output curve_out;
  auto* c = app.add_subcommand("curve", "m(alpha), lambda(alpha) and bounds as CSV");
  c->add_option("--dim", curve.dim, "dimension")->capture_default_str();
  c->add_option("--alpha-min", curve.alpha_min)->capture_default_str();
  c->add_option("--alpha-max", curve.alpha_max)->capture_default_str();
  c->add_option("--steps", curve.steps)->capture_default_str();
  c->add_option("--jobs", curve.jobs, "worker threads")->capture_default_str();
  c->add_flag("--with-limits", curve.with_limits, "add closed-form rows at alpha = 0 and 1");
  c->add_option("--out", curve_out.path, "CSV path (default stdout)");
  c->add_flag("--gnuplot", curve_out.gnuplot, "also write <out>.gp");

  MCurveRequest mcurve;
  Output mcurve_out;
  auto* mc = app.add_subcommand("mcurve", "fixed-ratio eigenvalue against m as CSV");
  mc->add_option("--dim", mcurve.dim)->capture_default_str();
  mc->add_option("--alpha", mcurve.alpha)->capture_default_str();
  mc->add_option("--m-min", mcurve.m_min)->capture_default_str();
  mc->add_option("--m-max", mcurve.m_max)->capture_default_str();
  mc->add_option("--steps", mcurve.steps)->capture_default_str();
  mc->add_option("--jobs", mcurve.jobs)->capture_default_str();
  mc->add_option("--out", mcurve_out.path, "CSV path (default stdout)");
  mc->add_flag("--gnuplot", mcurve_out.gnuplot, "also write <out>.gp");

  std::string request_path;
  auto* g = app.add_subcommand("grid", "single twisted eigenvalue run from a JSON request");
  g->add_option("file", request_path, "JSON grid request")->required();

  std::string suite = "all";
  auto* v = app.add_subcommand("verify", "run a verification suite");
  v->add_option("suite", suite, "bessel | twoball | grid | all")
      ->check(CLI::IsMember({"bessel", "twoball", "grid", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c)
      return cmd_curve(curve, curve_out);
    if (*mc)
      return cmd_mcurve(mcurve, mcurve_out);
    if (*g)
      return cmd_grid(request_path);
    return cmd_verify(suite);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kFailure;
  }
}
