/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the bit-level soft-error reliability toolkit: BIR program
 * parsing, four-valued bit analysis, fault-index coalescing, fault-injection
 * campaigns, campaign pruning, equivalence validation, and reliability-aware
 * instruction scheduling.
 *
 * Conventions:
 *  - Every returned char* is heap-allocated; release it with
 *    bitrel_free_string().
 *  - Functions returning int use the BITREL_* status codes; on failure the
 *    optional `err` out-parameter (if non-NULL) receives a message.
 *  - Handles are opaque; free them with the matching *_free function.
 */
#ifndef BITREL_H
#define BITREL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  BITREL_OK = 0,
  BITREL_ERR_USAGE = 1,   /* bad arguments (unknown function, policy, ...) */
  BITREL_ERR_INPUT = 2,   /* parse/analysis/plan errors */
  BITREL_ERR_UNSOUND = 3  /* validation found unsound equivalence pairs */
};

typedef struct bitrel_program bitrel_program;
typedef struct bitrel_analysis bitrel_analysis;

void bitrel_free_string(char* s);

/* ---- programs ---- */

/* Parse BIR text; NULL on error (err receives the message). */
bitrel_program* bitrel_parse(const char* text, char** err);
void bitrel_program_free(bitrel_program* p);

/* Canonical textual form of the whole program. */
char* bitrel_program_print(const bitrel_program* p);

size_t bitrel_program_function_count(const bitrel_program* p);
/* Name of function `index`, or NULL if out of range. */
char* bitrel_program_function_name(const bitrel_program* p, size_t index);
/* Declared bit width / register count of function `index` (0 if out of
 * range). */
unsigned bitrel_program_function_width(const bitrel_program* p, size_t index);
unsigned bitrel_program_function_regs(const bitrel_program* p, size_t index);

/* Deterministic corpus generator; returns BIR text. */
char* bitrel_gen_corpus_program(uint64_t seed, int index);

/* ---- static analysis ---- */

/* Run the bit-value analysis and fault-index coalescing for one function
 * (NULL name = first function). NULL on error. */
bitrel_analysis* bitrel_analyze(const bitrel_program* p, const char* function,
                                char** err);
void bitrel_analysis_free(bitrel_analysis* a);

/* Per-point abstract register states (JSON). */
char* bitrel_analysis_bitvalues_json(const bitrel_analysis* a);
/* Fault-site equivalence classes (JSON). */
char* bitrel_analysis_coalesce_json(const bitrel_analysis* a);

/* ---- dynamic pipeline ----
 * All take the initial input vector as parallel arrays (in_regs[i] :=
 * in_vals[i]); registers not listed start at zero. cycle_limit 0 means ten
 * times the golden trace length. */

/* Execute once with optional bit flips; out_trace receives JSON lines. */
int bitrel_simulate(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const long* flip_cycles, const unsigned* flip_regs,
                    const unsigned* flip_bits, size_t n_flips,
                    long cycle_limit, char** out_trace, char** err);

/* Campaign plan over the golden trace. bec=0: inject-on-read baseline;
 * bec=1: equivalence-pruned plan (out_stats receives accounting JSON if
 * non-NULL). */
int bitrel_plan(const bitrel_analysis* a, const unsigned* in_regs,
                const uint64_t* in_vals, size_t n_inputs, int bec,
                long cycle_limit, char** out_plan, char** out_stats,
                char** err);

/* Run a campaign. plan_json NULL = full inject-on-read space. out_summary
 * (if non-NULL) receives a one-line resource summary. */
int bitrel_campaign(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const char* plan_json, int jobs, long cycle_limit,
                    char** out_campaign, char** out_summary, char** err);

/* Reconstruct the full-space result from a pruned campaign (pure JSON
 * transform; no execution). */
int bitrel_expand(const char* plan_json, const char* campaign_json,
                  char** out_campaign, char** err);

/* Exhaustive campaign + soundness check of the coalesced relation. Returns
 * BITREL_ERR_UNSOUND (report still emitted) if any same-class pair of
 * injections behaved differently. */
int bitrel_validate(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs, int jobs,
                    long cycle_limit, char** out_report, char** err);

/* Reliability-aware list scheduling. policy: "best", "worst" or "original".
 * out_program receives the rescheduled BIR text; out_report (if non-NULL)
 * receives vulnerability figures for all three policies. */
int bitrel_schedule(const bitrel_analysis* a, const unsigned* in_regs,
                    const uint64_t* in_vals, size_t n_inputs,
                    const char* policy, long cycle_limit, char** out_program,
                    char** out_report, char** err);

#ifdef __cplusplus
}
#endif

#endif /* BITREL_H */
