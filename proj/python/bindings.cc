#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>

#include "planemvs/aggregation.h"
#include "planemvs/consistency.h"
#include "planemvs/errors.h"
#include "planemvs/fusion.h"
#include "planemvs/geometry.h"
#include "planemvs/pipeline.h"
#include "planemvs/prior.h"
#include "planemvs/scene_io.h"
#include "planemvs/synth.h"

namespace py = pybind11;
using namespace planemvs;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const Points& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DimensionError("expected an (N, 3) array");
  std::vector<Vec3> out(a.shape(0));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return out;
}

PointCloud to_cloud(const Points& a) {
  PointCloud c;
  for (const Vec3& p : to_points(a)) c.points.push_back({p, Vec3(0, 0, 1), {0, 0, 0}});
  return c;
}

const char* source_name(CandidateSource s) {
  switch (s) {
    case CandidateSource::kSam: return "sam";
    case CandidateSource::kTri: return "tri";
    default: return "raw";
  }
}

py::dict depth_dict(const DepthMetrics& m) {
  py::dict d;
  d["fraction_within"] = m.fraction_within;
  d["mean_abs_rel_error"] = m.mean_abs_rel_error;
  d["count"] = m.count;
  return d;
}

py::dict metrics_dict(const PipelineMetrics& m) {
  py::dict d;
  d["depth_all"] = depth_dict(m.depth_all);
  d["ref_depth_all"] = depth_dict(m.ref_depth_all);
  if (m.depth_textureless) d["depth_textureless"] = depth_dict(*m.depth_textureless);
  if (m.ref_depth_textureless) d["ref_depth_textureless"] = depth_dict(*m.ref_depth_textureless);
  if (m.cloud) d["cloud"] = py::dict(py::arg("completeness") = m.cloud->completeness,
                                     py::arg("accuracy") = m.cloud->accuracy, py::arg("f1") = m.cloud->f1,
                                     py::arg("tau") = m.cloud->tau);
  d["cloud_points"] = m.cloud_points;
  return d;
}

PipelineConfig make_config(const std::map<std::string, std::string>& overrides) {
  PipelineConfig cfg;
  std::vector<KeyValue> kvs;
  for (const auto& [k, v] : overrides) kvs.push_back({k, v, 0});
  cfg.apply(kvs, "overrides");
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Plane-prior PatchMatch multi-view stereo";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init<double, double, double, double, const Mat3&, const Vec3&, double, double>(), py::arg("fx"),
           py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("R"), py::arg("t"), py::arg("d_min"),
           py::arg("d_max"))
      .def_property_readonly("K", &CameraModel::K)
      .def_property_readonly("R", &CameraModel::R)
      .def_property_readonly("t", &CameraModel::t)
      .def_property_readonly("center", &CameraModel::center)
      .def_property_readonly("d_min", &CameraModel::d_min)
      .def_property_readonly("d_max", &CameraModel::d_max)
      .def("project",
           [](const CameraModel& c, const Vec3& X) -> std::optional<std::pair<Vec2, double>> {
             const auto p = project(c, X);
             if (!p) return std::nullopt;
             return std::pair{p->pixel, p->depth};
           })
      .def("back_project", [](const CameraModel& c, const Vec2& px, double d) { return back_project(c, px, d); });

  m.def(
      "homography",
      [](const CameraModel& ref, const CameraModel& src, double depth, const Vec3& normal, const Vec2& px) {
        return homography(ref, src, {depth, normal}, px);
      },
      py::arg("ref"), py::arg("src"), py::arg("depth"), py::arg("normal"), py::arg("pixel"));
  m.def(
      "epipolar_line",
      [](const CameraModel& ref, const CameraModel& src, const Vec2& q) {
        const EpipolarLine l = epipolar_line(ref, src, q);
        return std::tuple{l.a, l.b, l.c};
      },
      "Line a x + b y + c = 0 in the reference image for a source pixel", py::arg("ref"), py::arg("src"),
      py::arg("pixel_in_src"));

  m.def("neighborhood_curvature", [](const Points& pts) { return neighborhood_curvature(to_points(pts)).curvature; });
  m.def(
      "ransac_plane_fit",
      [](const Points& pts, uint64_t seed, double inlier_tol, double min_inlier_fraction) {
        PriorParams p;
        p.ransac_inlier_tol = inlier_tol;
        p.min_inlier_fraction = min_inlier_fraction;
        p.validate();
        const RansacResult r = ransac_plane_fit(to_points(pts), p, seed);
        return py::dict(py::arg("normal") = Vec3(r.plane.normal()), py::arg("offset") = r.plane.offset(),
                        py::arg("inlier_fraction") = r.inlier_fraction, py::arg("accepted") = r.accepted);
      },
      py::arg("points"), py::arg("seed") = 0, py::arg("inlier_tol") = PriorParams{}.ransac_inlier_tol,
      py::arg("min_inlier_fraction") = PriorParams{}.min_inlier_fraction);

  m.def("smooth_term", [](const std::vector<double>& v) { return smooth_term(v); });
  m.def(
      "select_hypothesis",
      [](std::optional<double> l_sam, std::optional<double> l_tri, double l_raw, double p1, double p2) {
        AggregationParams p;
        p.p1 = p1;
        p.p2 = p2;
        const Selection s = select_hypothesis(l_sam, l_tri, l_raw, p);
        return std::tuple{std::string(source_name(s.source)), s.L, s.total};
      },
      py::arg("l_sam"), py::arg("l_tri"), py::arg("l_raw"), py::arg("p1") = AggregationParams{}.p1,
      py::arg("p2") = AggregationParams{}.p2);
  m.def(
      "global_agg_cost",
      [](double ph, double geo, double smooth, double alpha_geo) {
        AggregationParams p;
        p.alpha_geo = alpha_geo;
        return global_agg_cost(ph, geo, smooth, p);
      },
      py::arg("cost_ph"), py::arg("cost_geo"), py::arg("l_smooth"), py::arg("alpha_geo") = AggregationParams{}.alpha_geo);
  m.def(
      "likelihood_factors",
      [](double ph, double geo, double smooth, double alpha_geo) {
        AggregationParams p;
        p.alpha_geo = alpha_geo;
        const LikelihoodFactors f = likelihood_factors(ph, geo, smooth, p);
        return std::tuple{f.photometric, f.prior, f.aggregation};
      },
      py::arg("cost_ph"), py::arg("cost_geo"), py::arg("l_smooth"), py::arg("alpha_geo") = AggregationParams{}.alpha_geo);
  m.def(
      "epipolar_geo_cost",
      [](double dist_H, double dist_sta, const Vec3& n_p, const Vec3& n_q, double omega_geo) {
        ConsistencyParams p;
        p.omega_geo = omega_geo;
        EpipolarGeoContext c;
        c.dist_H = dist_H;
        c.dist_sta = dist_sta;
        return epipolar_geo_cost(c, n_p, n_q, p);
      },
      py::arg("dist_H"), py::arg("dist_sta"), py::arg("n_p"), py::arg("n_q"),
      py::arg("omega_geo") = ConsistencyParams{}.omega_geo);

  m.def(
      "evaluate_cloud",
      [](const Points& est, const Points& gt, double tau) {
        const CloudMetrics c = evaluate_cloud(to_cloud(est), to_cloud(gt), tau);
        return py::dict(py::arg("completeness") = c.completeness, py::arg("accuracy") = c.accuracy,
                        py::arg("f1") = c.f1);
      },
      py::arg("est"), py::arg("gt"), py::arg("tau"));

  m.def("default_scene_spec", [](uint64_t seed) { return format_scene_spec(floor_wall_spec(seed)); },
        py::arg("seed") = 1);
  m.def(
      "synthesize",
      [](const std::filesystem::path& out, const std::string& spec_text) {
        const SyntheticSceneSpec spec = parse_scene_spec(spec_text, "spec");
        const SyntheticScene s = synth_scene(spec);
        save_synthetic(s, spec, out);
        return py::dict(py::arg("views") = s.bundle.views.size(),
                        py::arg("textureless_fraction") = s.textureless_fraction);
      },
      "Render a scene spec and write it with ground truth", py::arg("out"), py::arg("spec"));

  m.def("default_config", [] { return PipelineConfig{}.to_text(); });
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& scene, const std::filesystem::path& out,
         const std::map<std::string, std::string>& overrides) {
        const PipelineConfig cfg = make_config(overrides);
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(cfg, scene, out);
        }
        return r.metrics ? py::object(metrics_dict(*r.metrics)) : py::object(py::none());
      },
      "Run every stage; returns metrics when the scene has ground truth", py::arg("scene"), py::arg("out"),
      py::arg("config") = std::map<std::string, std::string>{});

  m.def(
      "read_depth_map",
      [](const std::filesystem::path& base) {
        const DepthNormalMap d = read_depth_map(base);
        const py::ssize_t h = d.height(), w = d.width();
        py::array_t<float> depth({h, w}), normal({h, w, py::ssize_t(3)}), cost({h, w});
        std::copy(d.depths().begin(), d.depths().end(), depth.mutable_data());
        std::copy(d.normals().begin(), d.normals().end(), normal.mutable_data());
        std::copy(d.costs().begin(), d.costs().end(), cost.mutable_data());
        return std::tuple{depth, normal, cost};
      },
      "Depth, normal and cost arrays of a map written under `base`", py::arg("base"));
}
