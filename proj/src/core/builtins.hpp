#pragma once

// Builtin metric families: model spaces used as oracles and the glued torus
// examples built from perturbed product blocks.

#include <map>
#include <string>
#include <vector>

#include "metric.hpp"

namespace cn2 {

using ParamMap = std::map<std::string, std::string>;

/// "a=1,b=2" -> {a:1, b:2}. Values may not contain commas.
ParamMap parse_params(const std::string& text);

struct BuiltinInfo {
  std::string name;
  std::string params;  // "key=default ..." documentation
  std::string summary;
};

const std::vector<BuiltinInfo>& builtin_list();

/// Throws BadParams for unknown names, unknown keys or invalid values.
/// Every family accepts `scale=lambda`, multiplying the metric by lambda^2.
Atlas make_builtin(const std::string& name, const ParamMap& params = {});

/// Product block e^{2 phi}(dx_a^2 + dx_b^2) + sum of the remaining dx_k^2 on the box
/// [lo, hi]. phi may only depend on the surface coordinates a and b and must
/// vanish on the collar of width `margin` inside the surface box.
std::shared_ptr<MetricField> make_block(const std::vector<double>& lo, const std::vector<double>& hi,
                                        int axis_a, int axis_b, const expr::Expr& phi, double margin,
                                        const std::string& label);

/// As above with phi given as source text over the default coordinate names.
std::shared_ptr<MetricField> make_block(const std::vector<double>& half_widths, const std::string& phi,
                                        double margin);

std::shared_ptr<MetricField> scaled_field(const MetricField& f, double lambda);

Atlas make_flat(int n, double length = 2.0);
Atlas make_cone(double c, double r_min = 0.5, double r_max = 4.0);
Atlas make_sphere_product(double K);
Atlas make_sphere2();
Atlas make_sphere3();
Atlas make_strip_cylinder(double eps = 0.05, double T = 6.0, int flat_dims = 0);
Atlas make_hypersurface_graph(const std::string& f, int n);
Atlas make_ex1();
Atlas make_ex2();
Atlas make_ex3(int N);
Atlas make_ex4(int N, const std::vector<std::pair<int, int>>& slopes);

}  // namespace cn2
