#ifndef SCRATCHKIT_H
#define SCRATCHKIT_H

/* C interface to the scratchkit analysis library.
 *
 * Usage pattern: create a context, point it at a block catalog (and, for the
 * assistant, an example corpus plus either a fixture file or live transport
 * settings), then run analyses. Results come back as heap-allocated UTF-8
 * JSON strings; release them with sk_string_free. All functions returning
 * sk_status leave a human-readable message in sk_last_error on failure.
 *
 * Contexts are not thread-safe; share nothing or lock externally. Projects
 * are plain data and may move between contexts.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum sk_status {
    SK_OK = 0,
    SK_ERR_MALFORMED_ARCHIVE = 1,
    SK_ERR_MALFORMED_JSON = 2,
    SK_ERR_GRAPH_INCONSISTENCY = 3,
    SK_ERR_VALIDATION_FAILURE = 4,
    SK_ERR_DUPLICATE_OPCODE = 5,
    SK_ERR_MISSING_FIELD = 6,
    SK_ERR_NO_MATCH = 7,
    SK_ERR_EMPTY_CATALOG = 8,
    SK_ERR_EMPTY_TEMPLATE = 9,
    SK_ERR_EMPTY_FINAL = 10,
    SK_ERR_OUT_OF_RANGE = 11,
    SK_ERR_ARITY_MISMATCH = 12,
    SK_ERR_DANGLING_END = 13,
    SK_ERR_UNKNOWN_TARGET = 14,
    SK_ERR_ID_COLLISION = 15,
    SK_ERR_EMPTY_CORPUS = 16,
    SK_ERR_EMPTY_QUESTION = 17,
    SK_ERR_NO_BLOCK_ARRAY = 18,
    SK_ERR_EMPTY_BLOCK_ARRAY = 19,
    SK_ERR_TRANSPORT_FAILURE = 20,
    SK_ERR_PROMPT_TOO_LONG = 21,
    SK_ERR_IO = 22,
    SK_ERR_INVALID_ARGUMENT = 23,
    SK_ERR_UNKNOWN = 24
} sk_status;

/* Stable PascalCase name for a status, e.g. "NoMatch". */
const char* sk_status_name(sk_status status);

typedef struct sk_context sk_context;
typedef struct sk_project sk_project;

/* Transport settings are seeded from SCRATCHKIT_ENDPOINT, SCRATCHKIT_API_KEY,
 * SCRATCHKIT_MODEL and SCRATCHKIT_TIMEOUT; sk_context_set overrides them. */
sk_context* sk_context_new(void);
void sk_context_free(sk_context* ctx);

/* Message for the context's most recent failure ("" when the last call
 * succeeded). Valid until the next call on the same context. */
const char* sk_last_error(const sk_context* ctx);

/* Block catalog (TSV), required by match/generate/assist. */
sk_status sk_context_load_catalog(sk_context* ctx, const char* path);

/* Few-shot example corpus (JSON), required by assist. Examples are compiled
 * against the loaded catalog, so load the catalog first. */
sk_status sk_context_load_corpus(sk_context* ctx, const char* path);

/* Recorded question/answer fixture (JSON). Once loaded, assist answers from
 * the fixture instead of the live endpoint. */
sk_status sk_context_load_fixture(sk_context* ctx, const char* path);

/* Set a named option from its string form. Options:
 *   threshold       matcher cutoff in (0,1], default 0.25
 *   shots           few-shot count, default 10
 *   token-budget    prompt size ceiling, default 8196
 *   ranked-shots    1 = similarity-ranked shots (default), 0 = corpus order
 *   metrics-mode    "opcode" (default) or "strict"
 *   basic-max       highest total still labelled "basic", default 7
 *   developing-max  highest total still labelled "developing", default 14
 *   sprite          target sprite for generated scripts, "" = first sprite
 *   endpoint        live completion endpoint URL
 *   api-key         bearer credential for the live endpoint
 *   model           model name sent to the live endpoint
 *   timeout         live request timeout in seconds
 */
sk_status sk_context_set(sk_context* ctx, const char* name, const char* value);

/* Projects: .sb3 archives or bare project.json, auto-detected. */
sk_status sk_project_open(sk_context* ctx, const uint8_t* bytes, size_t len, sk_project** out);
sk_status sk_project_open_file(sk_context* ctx, const char* path, sk_project** out);

/* Writes a deterministic .sb3 archive (same model, same bytes). */
sk_status sk_project_save_file(sk_context* ctx, const sk_project* project, const char* path);
void sk_project_free(sk_project* project);

/* Canonical project.json text. */
sk_status sk_project_json(sk_context* ctx, const sk_project* project, char** out_json);

/* Structural rule violations: [{rule, target, block, detail}, ...]. */
sk_status sk_validate(sk_context* ctx, const sk_project* project, char** out_json);

/* Seven-dimension skill report plus total, mastery label and evidence. */
sk_status sk_score(sk_context* ctx, const sk_project* project, char** out_json);

/* Block-adoption comparison of a template against a finished project:
 * {retention, expansion, intersection_size, x_size, y_size, mode}. */
sk_status sk_metrics(sk_context* ctx, const sk_project* template_project,
                     const sk_project* final_project, char** out_json);

/* Sprites plus stage backdrops. */
sk_status sk_visual_elements(sk_context* ctx, const sk_project* project, size_t* out_count);

/* Fuzzy-match one block description against the catalog:
 * {opcode, distance, normalized_distance, ambiguous}. */
sk_status sk_match(sk_context* ctx, const char* text, char** out_json);

/* Turn a JSON array of block descriptions into a fresh script. Returns
 * {blocks, opcodes, patch}; when `project` is non-null the script is also
 * injected into it in memory (save separately). */
sk_status sk_generate(sk_context* ctx, const char* blocks_json, sk_project* project,
                      char** out_json);

/* Full assistant round trip for one question. Returns {rationale, blocks,
 * categories, opcodes, patch}; with a non-null `project` the patch is also
 * injected into it in memory. */
sk_status sk_assist(sk_context* ctx, const char* question, sk_project* project, char** out_json);

void sk_string_free(char* text);

#if defined(__cplusplus)
}
#endif

#endif /* SCRATCHKIT_H */
