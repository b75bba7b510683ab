#ifndef ATLAS_H
#define ATLAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AtlasStatus {
  AtlasStatus_Ok = 0,
  AtlasStatus_NullPointer = 1,
  AtlasStatus_InvalidArgument = 2,
  AtlasStatus_OutsideDomain = 3,
  AtlasStatus_NumericalFailure = 4,
  AtlasStatus_Io = 5,
  AtlasStatus_Panic = 6,
} AtlasStatus;

typedef enum AtlasFamily {
  AtlasFamily_Newton = 0,
  AtlasFamily_Antipodal = 1,
} AtlasFamily;

typedef enum AtlasTier {
  AtlasTier_Preview = 0,
  AtlasTier_Standard = 1,
  AtlasTier_Analysis = 2,
} AtlasTier;

/**
 * Opaque rendered image with its class raster and metadata.
 */
typedef struct AtlasImage AtlasImage;

/**
 * Opaque parameter of one of the two families.
 */
typedef struct AtlasParameter AtlasParameter;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free it.
 */
const char *atlas_version(void);

/**
 * Copy of the last error message raised on this thread, or NULL when there is none.
 * Release it with `atlas_string_free`.
 */
char *atlas_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library that has not been freed yet.
 */
void atlas_string_free(char *s);

/**
 * Creates a parameter handle. Newton parameters outside the region U are accepted here;
 * calls that need the domain report `OutsideDomain`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum AtlasStatus atlas_parameter_new(enum AtlasFamily fam,
                                     double re,
                                     double im,
                                     struct AtlasParameter **out);

/**
 * Releases a parameter handle.
 *
 * # Safety
 * `p` must be NULL or a handle from `atlas_parameter_new` that has not been freed yet.
 */
void atlas_parameter_free(struct AtlasParameter *p);

/**
 * Whether the parameter lies in the family's domain (always 1 for the antipodal family).
 *
 * # Safety
 * `p` must be NULL or a live parameter handle.
 */
int32_t atlas_parameter_in_domain(const struct AtlasParameter *p);

/**
 * Classification document of the parameter as JSON, same as `atlas classify`.
 *
 * # Safety
 * `p` must be a live parameter handle and `out` valid writable storage for one pointer.
 * The string written to `out` must be released with `atlas_string_free`.
 */
enum AtlasStatus atlas_classify_json(const struct AtlasParameter *p, enum AtlasTier t, char **out);

/**
 * Boundary triple and co-root visibility verdicts as JSON, same as `atlas visibility`.
 *
 * # Safety
 * `p` must be a live parameter handle and `out` valid writable storage for one pointer.
 * The string written to `out` must be released with `atlas_string_free`.
 */
enum AtlasStatus atlas_visibility_json(const struct AtlasParameter *p, char **out);

/**
 * Renders a parameter-plane viewport.
 *
 * # Safety
 * `out` must be valid writable storage for one handle pointer. Release the image with
 * `atlas_image_free`.
 */
enum AtlasStatus atlas_render_parameter(enum AtlasFamily fam,
                                        double center_re,
                                        double center_im,
                                        double scale,
                                        uint32_t width,
                                        uint32_t height,
                                        enum AtlasTier t,
                                        struct AtlasImage **out);

/**
 * # Safety
 * `img` must be NULL or a live image handle.
 */
uint32_t atlas_image_width(const struct AtlasImage *img);

/**
 * # Safety
 * `img` must be NULL or a live image handle.
 */
uint32_t atlas_image_height(const struct AtlasImage *img);

/**
 * Borrowed RGBA8 pixels, row-major, 4 * width * height bytes. Valid until the image is freed.
 *
 * # Safety
 * `img` must be a live image handle; `len` may be NULL.
 */
const uint8_t *atlas_image_rgba(const struct AtlasImage *img, uintptr_t *len);

/**
 * Render metadata as JSON (family, viewport, palette_version, class_histogram, max_period).
 *
 * # Safety
 * `img` must be a live image handle. Release the result with `atlas_string_free`.
 */
char *atlas_image_meta_json(const struct AtlasImage *img);

/**
 * Writes the image as PNG to a UTF-8 path.
 *
 * # Safety
 * `img` must be a live image handle and `path` a NUL-terminated string.
 */
enum AtlasStatus atlas_image_write_png(const struct AtlasImage *img, const char *path);

/**
 * Releases an image handle.
 *
 * # Safety
 * `img` must be NULL or a handle from `atlas_render_parameter` that has not been freed yet.
 */
void atlas_image_free(struct AtlasImage *img);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATLAS_H */
