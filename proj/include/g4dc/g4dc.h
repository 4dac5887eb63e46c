/* g4dc: rate-distortion optimized codec for dynamic Gaussian scene models.
 *
 * C interface of the shared library. All objects are opaque handles created
 * and destroyed through these functions; every call that can fail returns a
 * g4dc_status and leaves a thread-local message readable via
 * g4dc_last_error(). Strings returned through out-parameters are heap
 * allocations owned by the caller; release them with g4dc_string_free().
 */
#ifndef G4DC_H
#define G4DC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct g4dc_scene g4dc_scene;
typedef struct g4dc_container g4dc_container;

typedef enum g4dc_status {
  G4DC_OK = 0,
  G4DC_ERR_VALIDATION = 2, /* bad arguments, invalid scene or config */
  G4DC_ERR_FORMAT = 3,     /* malformed or corrupt file/container */
  G4DC_ERR_IO = 4,         /* filesystem failure */
  G4DC_ERR_INTERNAL = 5
} g4dc_status;

uint32_t g4dc_version(void);

/* Message describing the most recent failure on this thread. */
const char* g4dc_last_error(void);

void g4dc_string_free(char* s);

/* --- scenes ------------------------------------------------------------- */

/* Reads / writes the .g4s interchange format. */
g4dc_status g4dc_scene_load(const char* path, g4dc_scene** out);
g4dc_status g4dc_scene_save(const g4dc_scene* scene, const char* path);

/* Deterministic synthetic scene from a JSON config (see README); pass NULL
 * or "{}" for the standard test scene. */
g4dc_status g4dc_scene_generate(const char* config_json, uint64_t seed, g4dc_scene** out);

/* JSON summary: counts, duration, keyframes, SH degree. */
g4dc_status g4dc_scene_info(const g4dc_scene* scene, char** out_json);

void g4dc_scene_free(g4dc_scene* scene);

/* --- codec -------------------------------------------------------------- */

/* Encodes with a JSON config such as {"level":3,"seed":42}; NULL means the
 * level-3 preset. */
g4dc_status g4dc_encode(const g4dc_scene* scene, const char* config_json,
                        g4dc_container** out);

g4dc_status g4dc_decode(const g4dc_container* container, g4dc_scene** out);

g4dc_status g4dc_container_read(const char* path, g4dc_container** out);
g4dc_status g4dc_container_write(const g4dc_container* container, const char* path);

/* Per-section byte accounting plus prune counts, as JSON. */
g4dc_status g4dc_size_report(const g4dc_container* container, char** out_json);

void g4dc_container_free(g4dc_container* container);

/* --- evaluation ---------------------------------------------------------- */

/* Renders the fixed probe rig for both the reference scene and the decoded
 * container and reports {"psnr_db", "ssim", "traj_psnr_db"} as JSON. PSNR of
 * identical images is reported as the string "inf". */
g4dc_status g4dc_probe_metrics(const g4dc_scene* reference, const g4dc_container* container,
                               uint64_t probe_seed, int probe_size, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* G4DC_H */
