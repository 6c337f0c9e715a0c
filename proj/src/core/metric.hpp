#pragma once

// Metrics on coordinate boxes, and block complexes glued along faces by
// signed axis permutations plus translations.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "expr.hpp"

namespace cn2 {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

/// g, its first and second coordinate derivatives. dg[k] = d_k g, d2g[k][l] = d_k d_l g.
struct MetricJet {
  int n = 0;
  Mat g;
  std::array<Mat, 4> dg;
  std::array<std::array<Mat, 4>, 4> d2g;

  bool first_derivatives_zero() const;
};

struct ChartSpec {
  int n = 0;
  std::vector<std::string> coords;
  Vec lo, hi;
  std::array<bool, 4> periodic{};

  double width(int axis) const { return hi[axis] - lo[axis]; }
  static ChartSpec box(std::vector<std::string> coords, const std::vector<double>& lo,
                       const std::vector<double>& hi, std::array<bool, 4> periodic = {});
};

std::vector<std::string> default_coords(int n);

/// Closed-form evaluator: fills the jet up to the requested order.
using JetFunction = std::function<MetricJet(const Vec& p, int order)>;

class MetricField {
 public:
  /// comps is row-major n*n; a null entry defaults to delta_ij. Off-diagonal
  /// pairs must agree (same pointer or structurally equal) or one must be null.
  static std::shared_ptr<MetricField> from_exprs(ChartSpec chart, std::vector<expr::Expr> comps,
                                                 std::string label);
  static std::shared_ptr<MetricField> from_function(ChartSpec chart, JetFunction fn, std::string label);

  const ChartSpec& chart() const { return chart_; }
  int dim() const { return chart_.n; }
  const std::string& label() const { return label_; }
  bool is_expr() const { return !fn_; }
  /// Null for closed-form fields or defaulted entries.
  const expr::Expr& component(int i, int j) const { return comps_[i * chart_.n + j]; }

  /// No domain check. fd forces central differences of values in place of AD.
  MetricJet jet(const Vec& p, int order, bool fd = false) const;
  Mat value(const Vec& p) const;

  /// Wraps periodic axes, then checks domain and positive definiteness.
  Mat metric_at(const Vec& p) const;
  Vec wrap(const Vec& p) const;
  bool contains(const Vec& p, double tol = 1e-12) const;

 private:
  ChartSpec chart_;
  std::vector<expr::Expr> comps_;
  JetFunction fn_;
  std::string label_;
};

/// Throws NotPositiveDefinite (reporting the smallest eigenvalue) unless g > 0.
void check_positive_definite(const Mat& g);

struct FaceRef {
  int block = 0;
  int axis = 0;
  int side = 0;  // 0 = lower face, 1 = upper face
};

/// Identification of a (patch of a) face of `from` with a face of `to`:
/// x_to = A x_from + shift, with A a signed permutation matrix.
struct Glue {
  FaceRef from, to;
  Mat A;
  Vec shift;
  bool has_patch = false;
  Vec patch_lo, patch_hi;  // in `from` coordinates; the glued axis is ignored
  int inverse = -1;        // index of the reverse glue
};

struct Block {
  std::shared_ptr<const MetricField> field;
  Vec offset;  // placement in a global picture; informational
  std::string name;
  int nullity_axis = -1;  // known nullity direction of the construction, if any
};

/// Result of moving an unwrapped point into its home block: x = A raw + b.
struct Located {
  int block = 0;
  Vec x;
  Mat A;
  Vec b;
  int crossings = 0;
};

class Atlas {
 public:
  int dim = 0;
  std::vector<Block> blocks;
  std::vector<Glue> glues;
  double margin = 0.25;
  std::string label;
  bool fd = false;

  static Atlas from_field(std::shared_ptr<const MetricField> field);

  /// perm is 0-based: x_to[i] = flip[i] * x_from[perm[i]] + shift[i]. Adds the
  /// reverse identification too. Returns the forward glue index.
  int add_glue(FaceRef from, FaceRef to, const std::array<int, 4>& perm, const std::array<int, 4>& flip,
               const Vec& shift, const Vec* patch_lo = nullptr, const Vec* patch_hi = nullptr);

  /// Translation glues between every pair of face patches that touch in the
  /// global picture, with the global box periodic in every axis. Block boxes
  /// are taken to be in global coordinates.
  void glue_by_placement(const Vec& global_lo, const Vec& global_hi);

  const Glue* find_glue(int block, int axis, int side, const Vec& x) const;

  /// Follows identifications until x lies in a block box. Throws LeftDomain
  /// when an unglued face is crossed.
  Located locate(int block, const Vec& x) const;

  /// Strict variant: throws Lost when the raw point lies more than one block
  /// width outside its box, OutOfDomain past an unglued face.
  Located canonicalize(int block, const Vec& x) const;

  /// Jet of the metric in the unwrapped coordinates of `block` at x.
  MetricJet jet(int block, const Vec& x, int order) const;
  Mat metric_at(int block, const Vec& x) const;

  const ChartSpec& chart(int block) const { return blocks[block].field->chart(); }

 private:
  std::vector<std::vector<int>> face_glues_;  // indexed by block * 8 + axis * 2 + side
};

}  // namespace cn2
