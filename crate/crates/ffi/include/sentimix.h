#ifndef SENTIMIX_H
#define SENTIMIX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SentimixStatus {
  SENTIMIX_STATUS_OK = 0,
  SENTIMIX_STATUS_NULL_ARGUMENT = 1,
  SENTIMIX_STATUS_INVALID_UTF8 = 2,
  SENTIMIX_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Model file, resource file or fingerprint problem.
   */
  SENTIMIX_STATUS_MODEL = 4,
  /**
   * Inputs the model cannot score, e.g. non-finite values.
   */
  SENTIMIX_STATUS_DATA = 5,
  /**
   * A bug: a panic was caught at the boundary.
   */
  SENTIMIX_STATUS_INTERNAL = 6,
} SentimixStatus;

/**
 * A loaded model with its restored feature pipeline.
 */
typedef struct SentimixPredictor SentimixPredictor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *sentimix_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sentimix_version(void);

/**
 * Loads a model file. The resource paths must name the same files the
 * model was trained with; pass null for a resource the model did not use.
 *
 * # Safety
 * String arguments must be null or valid NUL-terminated strings, and `out`
 * must be a valid pointer to writable storage.
 */
enum SentimixStatus sentimix_predictor_open(const char *model_path,
                                            const char *embeddings_path,
                                            const char *lexicon_dir,
                                            const char *easy_words_path,
                                            struct SentimixPredictor **out);

/**
 * Cleans and scores one raw tweet. Writes the regression score to
 * `out_score` and the label (-1 negative, 0 neutral, 1 positive) to
 * `out_label`; either may be null.
 *
 * # Safety
 * `predictor` must come from [`sentimix_predictor_open`] and not be freed;
 * `text` must be a valid NUL-terminated string; output pointers must be
 * null or valid.
 */
enum SentimixStatus sentimix_predict_text(const struct SentimixPredictor *predictor,
                                          const char *text,
                                          double *out_score,
                                          int32_t *out_label);

/**
 * Releases a predictor. Null is ignored.
 *
 * # Safety
 * `predictor` must be null or come from [`sentimix_predictor_open`], and
 * must not be used afterwards.
 */
void sentimix_predictor_free(struct SentimixPredictor *predictor);

/**
 * Cleans a raw tweet into space-separated lowercase words. The result is
 * written to `out` and must be released with [`sentimix_string_free`].
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SentimixStatus sentimix_clean_text(const char *text, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sentimix_string_free(char *s);

/**
 * Macro-averaged F1 of `len` predicted labels against gold labels, both
 * coded -1, 0, 1.
 *
 * # Safety
 * `gold` and `pred` must point to `len` readable values; `out` must be
 * valid.
 */
enum SentimixStatus sentimix_macro_f1(const int32_t *gold,
                                      const int32_t *pred,
                                      size_t len,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENTIMIX_H */
