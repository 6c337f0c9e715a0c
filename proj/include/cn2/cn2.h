#ifndef CN2_CN2_H
#define CN2_CN2_H

/* C interface to the cn2 toolkit. Every function returns a cn2_status; on
 * failure cn2_last_error() describes the error for the calling thread.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with cn2_string_free. Coordinates are block coordinates. */

#include <stddef.h>
#include <stdint.h>

#if defined(CN2_BUILDING_LIBRARY)
#define CN2_API __attribute__((visibility("default")))
#else
#define CN2_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cn2_status {
  CN2_OK = 0,
  CN2_ERR_SYNTAX = 1,
  CN2_ERR_UNKNOWN_IDENTIFIER = 2,
  CN2_ERR_DOMAIN = 3,
  CN2_ERR_OUT_OF_DOMAIN = 4,
  CN2_ERR_NOT_POSITIVE_DEFINITE = 5,
  CN2_ERR_BAD_PARAMS = 6,
  CN2_ERR_SUPPORT_VIOLATION = 7,
  CN2_ERR_LOST = 8,
  CN2_ERR_LEFT_DOMAIN = 9,
  CN2_ERR_STEP_UNDERFLOW = 10,
  CN2_ERR_DIMENSION_MISMATCH = 11,
  CN2_ERR_NOT_IN_NULLITY = 12,
  CN2_ERR_NOT_CN2_POINT = 13,
  CN2_ERR_DEGENERATE_FRAME = 14,
  CN2_ERR_ORIENTATION_FLIP = 15,
  CN2_ERR_BLOWUP = 16,
  CN2_ERR_RESOLUTION_TOO_COARSE = 17,
  CN2_ERR_IO = 18,
  CN2_ERR_INVALID_ARGUMENT = 19,
  CN2_ERR_INTERNAL = 100
} cn2_status;

typedef enum cn2_point_class { CN2_FLAT = 0, CN2_NONFLAT_CN2 = 1, CN2_NOT_CN2 = 2 } cn2_point_class;

typedef struct cn2_atlas cn2_atlas;

CN2_API const char* cn2_version(void);
CN2_API const char* cn2_status_name(cn2_status status);
CN2_API const char* cn2_last_error(void);
CN2_API void cn2_string_free(char* s);

/* Atlases. params is "key=value,key=value" or NULL. */
CN2_API cn2_status cn2_atlas_builtin(const char* name, const char* params, cn2_atlas** out);
CN2_API cn2_status cn2_atlas_load(const char* path, cn2_atlas** out);
CN2_API cn2_status cn2_atlas_parse(const char* text, cn2_atlas** out);
CN2_API void cn2_atlas_free(cn2_atlas* atlas);
CN2_API int cn2_atlas_dim(const cn2_atlas* atlas);
CN2_API int cn2_atlas_block_count(const cn2_atlas* atlas);
CN2_API const char* cn2_atlas_label(const cn2_atlas* atlas);
/* Nonzero: central differences of metric values instead of automatic differentiation. */
CN2_API void cn2_atlas_set_fd(cn2_atlas* atlas, int fd);

/* JSON array of {name, params, summary}. */
CN2_API cn2_status cn2_builtin_list(char** json);

typedef struct cn2_curvature_options {
  double tau_rank;
  double tau_flat;
} cn2_curvature_options;
CN2_API void cn2_curvature_options_default(cn2_curvature_options* opt);

/* Full curvature report. cls may be NULL. */
CN2_API cn2_status cn2_analyze(const cn2_atlas* atlas, int block, const double* point,
                               const cn2_curvature_options* opt, char** json, cn2_point_class* cls);
/* {point, class, scal, norm, mu}. */
CN2_API cn2_status cn2_classify(const cn2_atlas* atlas, int block, const double* point,
                                const cn2_curvature_options* opt, char** json, cn2_point_class* cls);

typedef struct cn2_flow_options {
  double rtol;
  double atol;
  double h_max; /* 0: half the atlas margin */
} cn2_flow_options;
CN2_API void cn2_flow_options_default(cn2_flow_options* opt);

/* CSV with one row per accepted step. complete is 0 when the path left the domain. */
CN2_API cn2_status cn2_geodesic(const cn2_atlas* atlas, int block, const double* p, const double* v, double t_max,
                                const cn2_flow_options* opt, char** csv, int* complete);
/* vectors holds k column vectors of length n, one after another. */
CN2_API cn2_status cn2_transport(const cn2_atlas* atlas, int block, const double* p, const double* v, double t_max,
                                 const double* vectors, int k, const cn2_flow_options* opt, char** json);
CN2_API cn2_status cn2_holonomy(const cn2_atlas* atlas, int block, const double* base, int axis_u, int axis_v,
                                double u0, double u1, double v0, double v1, const double* xi,
                                const cn2_flow_options* opt, char** json, int* satisfied);

/* c0 is row-major [c11, c12, c21, c22]. Samples past a singular time carry an error entry. */
CN2_API cn2_status cn2_riccati(const double* c0, const double* ts, int nt, double class_tol, char** json);

typedef struct cn2_splitting_options {
  double h_c;
  double class_tol;
  double tau_rank;
  double tau_flat;
  double t_max;  /* > 0: also follow C along the nullity geodesic */
  int samples;
  double jacobi_t_max; /* > 0: also run the Jacobi check with J0 = e1 */
} cn2_splitting_options;
CN2_API void cn2_splitting_options_default(cn2_splitting_options* opt);
/* hint orients the nullity vector and may be NULL. */
CN2_API cn2_status cn2_splitting(const cn2_atlas* atlas, int block, const double* p, const double* hint,
                                 const cn2_splitting_options* opt, char** json);

typedef struct cn2_detect_options {
  double h;
  int min_cells; /* > 0: per block, at least this many cells per axis */
  double kappa;
  int m_cap;
  double rho;     /* 0: 4h */
  double tol_par; /* 0: max(1e-4, 10 h^2) */
  double tol_bnl; /* 0: max(1e-4, 10 h^2) */
  double tol_cyl;
  double tau_rank;
  double tau_flat;
  int threads; /* 0: hardware concurrency */
} cn2_detect_options;
CN2_API void cn2_detect_options_default(cn2_detect_options* opt);
/* cells_csv may be NULL. not_cn2 is set when some cell center is not CN2. */
CN2_API cn2_status cn2_detect_graph(const cn2_atlas* atlas, const cn2_detect_options* opt, char** report_json,
                                    char** cells_csv, int* not_cn2);

typedef enum cn2_region_kind { CN2_REGION_ALL = 0, CN2_REGION_COMPONENT = 1, CN2_REGION_BOX = 2 } cn2_region_kind;
typedef struct cn2_region {
  cn2_region_kind kind;
  int component;
  int block;
  const double* lo;
  const double* hi;
} cn2_region;
/* opt only matters for component regions and may be NULL. */
CN2_API cn2_status cn2_volume(const cn2_atlas* atlas, const cn2_region* region, double h,
                              const cn2_detect_options* opt, char** json);

/* JSON array of {name, summary}. */
CN2_API cn2_status cn2_suite_list(char** json);
CN2_API cn2_status cn2_verify(const char* suite, uint64_t seed, int threads, char** json, int* passed, int* failed);

#ifdef __cplusplus
}
#endif

#endif
