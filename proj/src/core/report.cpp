#include "report.hpp"

#include <cmath>

namespace cn2 {

namespace {

double clean(double x) { return x == 0.0 ? 0.0 : x; }  // no negative zero in output

Json mat2_json(const Mat2& m) {
  return Json::array({Json::array({clean(m(0, 0)), clean(m(0, 1))}), Json::array({clean(m(1, 0)), clean(m(1, 1))})});
}

}  // namespace

Json to_json(const Vec& v) {
  Json j = Json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(clean(v[i]));
  return j;
}

Json to_json(const Mat& m) {
  Json j = Json::array();
  for (int i = 0; i < m.rows(); ++i) j.push_back(to_json(Vec(m.row(i).transpose())));
  return j;
}

Json columns_json(const Mat& m) {
  Json j = Json::array();
  for (int c = 0; c < m.cols(); ++c) j.push_back(to_json(Vec(m.col(c))));
  return j;
}

Json curvature_json(const CurvatureReport& r, const CurvatureOptions& opt) {
  const int n = r.n;
  Json j;
  j["point"] = to_json(r.point);
  j["class"] = point_class_name(r.classify(opt));
  j["scal"] = clean(r.scal);
  j["norm"] = clean(r.norm);
  j["mu"] = r.mu;
  j["g"] = to_json(r.g);
  Json G = Json::array();
  for (int k = 0; k < n; ++k) {
    Json a = Json::array();
    for (int i = 0; i < n; ++i) {
      Json b = Json::array();
      for (int l = 0; l < n; ++l) b.push_back(clean(r.christoffel(k, i, l)));
      a.push_back(b);
    }
    G.push_back(a);
  }
  j["christoffel"] = G;
  Json R = Json::array();
  for (int a = 0; a < n; ++a) {
    Json ra = Json::array();
    for (int b = 0; b < n; ++b) {
      Json rb = Json::array();
      for (int c = 0; c < n; ++c) {
        Json rc = Json::array();
        for (int d = 0; d < n; ++d) rc.push_back(clean(r.R(a, b, c, d)));
        rb.push_back(rc);
      }
      ra.push_back(rb);
    }
    R.push_back(ra);
  }
  j["riemann_lowered"] = R;
  j["ricci"] = to_json(r.ricci);
  j["nullity_basis"] = columns_json(r.nullity_basis);
  j["conullity_basis"] = columns_json(r.conullity_basis);
  Json sv = Json::array();
  for (double s : r.singular_values) sv.push_back(clean(s));
  j["singular_values"] = sv;
  j["ill_separated"] = r.ill_separated;
  j["tolerances"] = {{"tau_rank", opt.tau_rank}, {"tau_flat", opt.tau_flat}};
  return j;
}

Json riccati_json(const Mat2& C0, const std::vector<double>& ts, double class_tol) {
  Json j;
  j["C0"] = mat2_json(C0);
  j["class"] = split_class_name(classify_split(C0, class_tol));
  j["trace"] = clean(C0.trace());
  j["det"] = clean(C0.determinant());
  Json st = Json::array();
  for (double t : singular_times(C0)) st.push_back(t);
  j["singular_times"] = st;
  Json out = Json::array();
  for (double t : ts) {
    Json e;
    e["t"] = t;
    try {
      Mat2 C = riccati_closed_form(C0, t);
      auto [tr, det] = trace_det_evolution(C0, t);
      e["C"] = mat2_json(C);
      e["class"] = split_class_name(classify_split(C, class_tol));
      e["trace"] = clean(tr);
      e["det"] = clean(det);
    } catch (const Error& err) {
      e["error"] = error_code_name(err.code());
      e["message"] = err.what();
    }
    out.push_back(e);
  }
  j["samples"] = out;
  return j;
}

Json splitting_json(const AdaptedFrame& f, const SplittingTensor& st) {
  Json j;
  j["point"] = to_json(f.point);
  j["T"] = to_json(f.T);
  j["e1"] = to_json(f.e1);
  j["e2"] = to_json(f.e2);
  j["C"] = mat2_json(st.C);
  j["trace"] = clean(st.trace);
  j["det"] = clean(st.det);
  j["class"] = split_class_name(st.cls);
  Json diag;
  diag["alpha"] = clean(f.alpha);
  diag["beta"] = clean(f.beta);
  if (f.has_a) diag["a"] = clean(f.a);
  j["diagnostics"] = diag;
  return j;
}

Json riccati_field_json(const RiccatiFieldReport& r) {
  Json j;
  j["C0"] = mat2_json(r.C0);
  j["max_deviation"] = r.max_deviation;
  j["max_scal_deviation"] = r.max_scal_deviation;
  j["t_reached"] = r.t_reached;
  j["truncated"] = r.truncated;
  Json s = Json::array();
  for (std::size_t i = 0; i < r.t.size(); ++i)
    s.push_back({{"t", r.t[i]},
                 {"measured", mat2_json(r.measured[i])},
                 {"predicted", mat2_json(r.predicted[i])},
                 {"scal", clean(r.scal[i])},
                 {"scal_predicted", clean(r.scal_predicted[i])}});
  j["samples"] = s;
  return j;
}

Json divergence_json(const DivergenceReport& r) {
  return {{"div", clean(r.div)},
          {"trace_C", clean(r.trace_C)},
          {"residual", clean(r.residual)},
          {"geodesic_residual", clean(r.geodesic_residual)}};
}

Json jacobi_json(const JacobiReport& r) {
  Json j;
  j["max_deviation"] = r.max_deviation;
  j["t_max"] = r.t_max;
  Json s = Json::array();
  for (std::size_t i = 0; i < r.t.size(); ++i)
    s.push_back({{"t", r.t[i]}, {"deviation", r.deviation[i]}, {"jacobi_norm", r.jacobi_norm[i]}});
  j["samples"] = s;
  return j;
}

Json transport_json(const TransportResult& r, const Mat& initial) {
  Json j;
  const auto& path = r.path;
  j["complete"] = path.complete;
  if (!path.complete) j["stop_reason"] = path.stop_reason;
  if (!path.samples.empty()) {
    const auto& last = path.samples.back();
    j["t_end"] = last.t;
    j["end"] = {{"block", last.block}, {"x", to_json(last.x)}, {"v", to_json(last.v)}};
  }
  j["initial"] = columns_json(initial);
  j["transported"] = columns_json(r.transported);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace cn2
