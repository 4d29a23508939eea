#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <sstream>

#include "lrp/chemdist.hpp"
#include "lrp/clusters.hpp"
#include "lrp/errors.hpp"
#include "lrp/lab.hpp"
#include "lrp/theory.hpp"

namespace py = pybind11;
using namespace lrp;

namespace {

Point to_point(const std::vector<Coord>& c) {
  if (c.empty() || c.size() > static_cast<std::size_t>(kMaxDim)) throw InvalidInput("point dimension out of range");
  Point p(static_cast<int>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) p[static_cast<int>(i)] = c[i];
  return p;
}

std::vector<Coord> from_point(const Point& p) {
  std::vector<Coord> out;
  for (int i = 0; i < p.dim(); ++i) out.push_back(p[i]);
  return out;
}

BondModel make_model(int dim, double s, double beta, double nn_prob, const std::string& profile, const std::string& norm) {
  BondModel m;
  m.dim = dim;
  if (profile == "shifted-power") m.profile = ConnectionProfile::shifted_power(beta, s);
  else if (profile == "pure-power") m.profile = ConnectionProfile::pure_power(beta, s);
  else throw InvalidInput("profile must be shifted-power or pure-power");
  m.nn_prob = nn_prob;
  m.norm = parse_norm(norm);
  m.validate();
  return m;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full{"lrp"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : full) argv.push_back(a.c_str());
  std::ostringstream out;
  auto* old = std::cout.rdbuf(out.rdbuf());
  int code;
  {
    py::gil_scoped_release release;
    code = cli_main(static_cast<int>(argv.size()), argv.data());
  }
  std::cout.rdbuf(old);
  return py::make_tuple(code, out.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Long-range percolation core";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);

  py::class_<BondModel>(m, "BondModel")
      .def(py::init(&make_model), py::arg("dim") = 1, py::arg("s") = 1.5, py::arg("beta") = 1.0,
           py::arg("nn_prob") = 0.0, py::arg("profile") = "shifted-power", py::arg("norm") = "euclidean")
      .def_readonly("dim", &BondModel::dim)
      .def_readonly("nn_prob", &BondModel::nn_prob)
      .def("describe", &BondModel::describe)
      .def("pair_probability", [](const BondModel& bm, const std::vector<Coord>& x, const std::vector<Coord>& y) {
        return pair_probability(bm, to_point(x), to_point(y));
      })
      .def("__repr__", [](const BondModel& bm) { return "BondModel(" + bm.describe() + ")"; });

  py::class_<GraphSample>(m, "Graph")
      .def_property_readonly("site_count", &GraphSample::site_count)
      .def_property_readonly("edge_count", &GraphSample::edge_count)
      .def_property_readonly("seed", &GraphSample::seed)
      .def("edges",
           [](const GraphSample& g) {
             std::vector<std::pair<SiteIndex, SiteIndex>> out;
             for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
             return out;
           })
      .def("neighbors",
           [](const GraphSample& g, SiteIndex i) {
             if (i >= g.site_count()) throw InvalidInput("site index out of range");
             auto n = g.neighbors(i);
             return std::vector<SiteIndex>(n.begin(), n.end());
           })
      .def("point", [](const GraphSample& g, SiteIndex i) {
        if (i >= g.site_count()) throw InvalidInput("site index out of range");
        return from_point(g.point(i));
      })
      .def("index", [](const GraphSample& g, const std::vector<Coord>& p) {
        const Point q = to_point(p);
        if (!g.contains(q)) throw InvalidInput("site outside the sample box");
        return g.index(q);
      })
      .def("largest_component_fraction", &largest_component_fraction)
      .def("edge_list_text", &edge_list_text);

  m.def(
      "sample_graph",
      [](const BondModel& bm, Coord side, std::uint64_t seed, bool centered, int threads) {
        const Point o = Point::zero(bm.dim);
        const BoxSpec box = centered ? BoxSpec::centered(o, side) : BoxSpec::cornered(o, side);
        SamplerOptions opt;
        opt.threads = threads;
        py::gil_scoped_release release;
        return sample_graph(bm, box, seed, opt);
      },
      py::arg("model"), py::arg("side"), py::arg("seed") = 1, py::arg("centered") = false, py::arg("threads") = 1);

  m.def("chemical_distance", [](const GraphSample& g, const std::vector<Coord>& x, const std::vector<Coord>& y) {
    return chemical_distance(g, to_point(x), to_point(y));
  });

  m.def("delta", &delta, py::arg("s"), py::arg("d") = 1);
  m.def("depth_K", &depth_K, py::arg("N"), py::arg("gamma"));
  m.def("depth_n", &depth_n, py::arg("N"), py::arg("gamma"), py::arg("eps"));
  m.def("chernoff_rate", &chernoff_rate, py::arg("qprime"), py::arg("q"));

  m.def(
      "scale_sequence",
      [](double ell0, double N0, double s, double sprime, int d, double rho0, int depth) {
        const ScaleSequence q = make_scale_sequence(ell0, N0, s, sprime, d, rho0, depth);
        py::dict out;
        out["a"] = q.a;
        out["shift"] = q.shift;
        out["ell"] = q.ell;
        out["N"] = q.N;
        out["rho"] = q.rho;
        out["c0_terms"] = q.c0_terms;
        out["c0_terms_exact"] = q.c0_terms_exact;
        out["c0"] = q.c0;
        out["rho_positive"] = q.rho_positive;
        return out;
      },
      py::arg("ell0"), py::arg("N0"), py::arg("s"), py::arg("sprime"), py::arg("d") = 1, py::arg("rho0") = 0.5,
      py::arg("depth") = 6);

  m.def(
      "complete_graph_exact_distribution",
      [](std::uint64_t n, double r, double p) { return complete_graph_exact_distribution({n, r, p, 0, 0}); },
      py::arg("n"), py::arg("r"), py::arg("p"));
  m.def(
      "complete_graph_tail_bound",
      [](std::uint64_t n, double r, double p, double rprime, double pprime) {
        return complete_graph_tail_bound({n, r, p, rprime, pprime});
      },
      py::arg("n"), py::arg("r"), py::arg("p"), py::arg("rprime"), py::arg("pprime"));

  m.def(
      "shell_sum",
      [](int kappa, double b, double alpha, const std::string& mode) {
        ShellMode sm;
        if (mode == "at-least") sm = ShellMode::at_least;
        else if (mode == "below") sm = ShellMode::below;
        else throw InvalidInput("mode must be at-least or below");
        return shell_sum({kappa, b, alpha, sm});
      },
      py::arg("kappa"), py::arg("b"), py::arg("alpha"), py::arg("mode") = "below");

  m.def(
      "gap_exponent_inequality",
      [](double s, int d, double gamma, int n) {
        const auto r = gap_exponent_inequality(s, d, gamma, n);
        return py::make_tuple(r.lhs, r.rhs, r.holds);
      },
      py::arg("s"), py::arg("d"), py::arg("gamma"), py::arg("n"));

  m.def("run_cli", &run_cli, py::arg("args"));
}
