#ifndef RELU_ATLAS_H
#define RELU_ATLAS_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Enumeration strategy for [`ra_enumerate`].
typedef enum RaMode {
  RA_MODE_BRUTE = 0,
  RA_MODE_TRAVERSE = 1,
} RaMode;

// Result of every fallible call.
typedef enum RaStatus {
  RA_STATUS_OK = 0,
  RA_STATUS_NULL_POINTER = 1,
  RA_STATUS_INVALID_ARGUMENT = 2,
  RA_STATUS_PARSE = 3,
  RA_STATUS_INFEASIBLE = 4,
  RA_STATUS_RESOURCE_CAP = 5,
  RA_STATUS_IO = 6,
  RA_STATUS_INTERNAL = 7,
} RaStatus;

typedef struct RaAtlas RaAtlas;

typedef struct RaBarcode RaBarcode;

typedef struct RaDistanceMatrix RaDistanceMatrix;

typedef struct RaNetwork RaNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *ra_last_error_message(void);

// Releases a string returned by this library.
void ra_string_free(char *s);

// Parses a network from its JSON description.
enum RaStatus ra_network_from_json(const char *json, struct RaNetwork **out);

void ra_network_free(struct RaNetwork *net);

// Input dimension, or 0 for a null handle.
size_t ra_network_input_dim(const struct RaNetwork *net);

// Total number of hidden nodes, or 0 for a null handle.
size_t ra_network_hidden_count(const struct RaNetwork *net);

// Network output at `x` (length `input_dim`) into `out` (length `output_dim`).
enum RaStatus ra_network_forward(const struct RaNetwork *net,
                                 const double *x,
                                 size_t x_len,
                                 double *out,
                                 size_t out_len);

// Activation pattern of `x`: one byte (0 or 1) per hidden node into `bits`.
enum RaStatus ra_network_bit_vector(const struct RaNetwork *net,
                                    const double *x,
                                    size_t x_len,
                                    uint8_t *bits,
                                    size_t bits_len);

// Enumerates all regions. `lower`/`upper` (length `box_dim`) bound the input
// box; pass `box_dim == 0` for the whole space. `seed` (length `seed_len`)
// is the traversal start and may be empty for the box center or origin.
enum RaStatus ra_enumerate(const struct RaNetwork *net,
                           enum RaMode mode,
                           const double *lower,
                           const double *upper,
                           size_t box_dim,
                           const double *seed,
                           size_t seed_len,
                           uint64_t rng_seed,
                           struct RaAtlas **out);

void ra_atlas_free(struct RaAtlas *atlas);

size_t ra_atlas_region_count(const struct RaAtlas *atlas);

size_t ra_atlas_edge_count(const struct RaAtlas *atlas);

// Bit vector of region `index` (regions sorted by bit string) as a newly
// allocated 0/1 string; release with [`ra_string_free`]. Null on error.
char *ra_atlas_region_bits(const struct RaAtlas *atlas, size_t index);

// Hamming distance matrix of `count` bit vectors of `len` bytes each
// (row-major, one 0/1 byte per bit).
enum RaStatus ra_distmat_hamming(const uint8_t *bits,
                                 size_t count,
                                 size_t len,
                                 bool deduplicate,
                                 struct RaDistanceMatrix **out);

// Matrix from `n * n` row-major values.
enum RaStatus ra_distmat_from_values(const double *values, size_t n, struct RaDistanceMatrix **out);

// Matrix from lower-triangular CSV text.
enum RaStatus ra_distmat_from_lower_csv(const char *text, struct RaDistanceMatrix **out);

// Lower-triangular CSV text; release with [`ra_string_free`]. Null on error.
char *ra_distmat_to_lower_csv(const struct RaDistanceMatrix *d);

void ra_distmat_free(struct RaDistanceMatrix *d);

size_t ra_distmat_size(const struct RaDistanceMatrix *d);

// Entry `(i, j)`; NaN when out of range or for a null handle.
double ra_distmat_get(const struct RaDistanceMatrix *d, size_t i, size_t j);

// Rips barcodes in dimensions `0..=max_dim`. A NaN `t_max` means the
// largest finite entry. Bars with birth equal to death are dropped unless
// `include_zero` is set.
enum RaStatus ra_barcode_compute(const struct RaDistanceMatrix *d,
                                 size_t max_dim,
                                 double t_max,
                                 bool include_zero,
                                 struct RaBarcode **out);

void ra_barcode_free(struct RaBarcode *b);

// Number of bars in dimension `dim`.
size_t ra_barcode_bar_count(const struct RaBarcode *b, size_t dim);

// Bar `index` of dimension `dim`; an infinite bar reports `death = INFINITY`.
enum RaStatus ra_barcode_bar(const struct RaBarcode *b,
                             size_t dim,
                             size_t index,
                             double *birth,
                             double *death);

// Barcode JSON; release with [`ra_string_free`]. Null on error.
char *ra_barcode_to_json(const struct RaBarcode *b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELU_ATLAS_H */
