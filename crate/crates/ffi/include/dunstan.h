#ifndef DUNSTAN_H
#define DUNSTAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DunstanStatus {
  DUNSTAN_STATUS_OK = 0,
  DUNSTAN_STATUS_NULL_ARGUMENT = 1,
  DUNSTAN_STATUS_INVALID_UTF8 = 2,
  DUNSTAN_STATUS_PARSE_ERROR = 3,
  DUNSTAN_STATUS_INVALID_NUMERAL = 4,
  DUNSTAN_STATUS_INTERNAL = 5,
} DunstanStatus;

/**
 * A decoder bound to the shipped key table and lexicon.
 */
typedef struct DunstanDecoder DunstanDecoder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a decoder. Release it with `dunstan_decoder_free`.
 */
struct DunstanDecoder *dunstan_decoder_new(void);

/**
 * # Safety
 * `decoder` is null or came from `dunstan_decoder_new` and was not freed.
 */
void dunstan_decoder_free(struct DunstanDecoder *decoder);

/**
 * Decodes one DST line into a JSON array of the `top` best readings.
 *
 * # Safety
 * `decoder` is a live handle, `dst` a NUL-terminated string, and `out`
 * valid for writing one pointer.
 */
enum DunstanStatus dunstan_decode_line(const struct DunstanDecoder *decoder,
                                       const char *dst,
                                       uint32_t top,
                                       char **out);

/**
 * Encodes space-separated uppercase words as a DST line. Words that cannot
 * be encoded are left out; the call still succeeds.
 *
 * # Safety
 * As for `dunstan_decode_line`.
 */
enum DunstanStatus dunstan_encode(const struct DunstanDecoder *decoder,
                                  const char *text,
                                  char **out);

/**
 * Both date readings of a roman numeral string, as JSON.
 *
 * # Safety
 * `letters` is a NUL-terminated string and `out` valid for writing.
 */
enum DunstanStatus dunstan_romandate(const char *letters, char **out);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void dunstan_string_free(char *s);

/**
 * The message of the last failed call on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *dunstan_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUNSTAN_H */
