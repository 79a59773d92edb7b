#ifndef WIGSOLVE_H
#define WIGSOLVE_H

/* C interface to the wigsolve shared library: a mesh-free Monte Carlo
 * solver for the quantum phase-space transport equation with a signed
 * neural pushforward sampler, plus a grid-based verification suite.
 *
 * All functions return a wig_status; on failure wig_last_error() holds a
 * human-readable message (thread-local). Handles are opaque and must be
 * released with the matching *_free call. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct wig_config_t wig_config_t;
typedef struct wig_model_t wig_model_t;

/* Mirrors the CLI exit-code contract. */
typedef enum wig_status {
    WIG_OK = 0,
    WIG_ERR = 1,
    WIG_ERR_CONFIG = 2,
    WIG_ERR_DIVERGED = 3,
    WIG_ERR_VERIFY = 4
} wig_status;

const char* wig_version(void);
const char* wig_last_error(void);

/* --- configuration ------------------------------------------------------ */

wig_status wig_config_load(const char* path, wig_config_t** out);
wig_status wig_config_parse(const char* json_text, wig_config_t** out);
/* Serialized form (JSON); caller must free with wig_string_free. */
wig_status wig_config_dump(const wig_config_t* cfg, char** out);
wig_status wig_config_set_seed(wig_config_t* cfg, uint64_t seed);
wig_status wig_config_set_threads(wig_config_t* cfg, int threads);
wig_status wig_config_set_output_dir(wig_config_t* cfg, const char* dir);
void wig_config_free(wig_config_t* cfg);
void wig_string_free(char* s);

/* --- commands ------------------------------------------------------------ */

/* Run the verification suite; writes <out>/verify_report.csv. */
wig_status wig_cmd_verify(const wig_config_t* cfg);
/* Train; writes metrics.csv and checkpoint.bin under the output dir.
 * `interrupted`, when non-NULL, is polled between epochs; returning
 * non-zero flushes a checkpoint and stops cleanly. */
wig_status wig_cmd_train(const wig_config_t* cfg, int (*interrupted)(void));
/* Sample a stored model at the given times; writes samples.csv,
 * marginals.csv, negativity.csv and moments.csv. */
wig_status wig_cmd_evaluate(const wig_config_t* cfg, const char* checkpoint,
                            const double* times, size_t n_times,
                            uint64_t n_samples);
/* Grid workflows: "equivalence-sweep", "evolve <potential>",
 * "wigner <state>". */
wig_status wig_cmd_oracle(const wig_config_t* cfg, const char* subcommand);

/* --- direct model access -------------------------------------------------- */

wig_status wig_model_load(const char* checkpoint, wig_model_t** out);
int wig_model_dim(const wig_model_t* model);
double wig_model_alpha(const wig_model_t* model);
double wig_model_horizon(const wig_model_t* model);

/* Draw n signed samples at time t. xp_plus (and xp_minus when the model
 * carries a negative branch) receive n rows of (x_0..x_{N-1}, p_0..p_{N-1});
 * xp_minus may be NULL if wig_model_has_minus() reports 0. Weights receive
 * the branch weights (1 + alpha, alpha). */
int wig_model_has_minus(const wig_model_t* model);
wig_status wig_model_sample(const wig_model_t* model, double t, uint64_t n,
                            uint64_t seed, double* xp_plus, double* xp_minus,
                            double* alpha_plus, double* alpha_minus);
void wig_model_free(wig_model_t* model);

#ifdef __cplusplus
}
#endif

#endif /* WIGSOLVE_H */
