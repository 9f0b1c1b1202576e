/*
 * gsik: real-time character inverse kinematics by projected Gauss-Seidel.
 *
 * C interface. All objects are opaque handles created and destroyed through
 * this header. Functions return GSIK_OK or an error status; the message for
 * the most recent failure on the calling thread is available from
 * gsik_last_error(). Strings returned through `char**` out-parameters are
 * heap allocated and must be released with gsik_string_free().
 */
#ifndef GSIK_H
#define GSIK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GSIK_BUILDING_LIBRARY)
#    define GSIK_API __declspec(dllexport)
#  else
#    define GSIK_API __declspec(dllimport)
#  endif
#else
#  define GSIK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsik_status {
  GSIK_OK = 0,
  GSIK_ERROR_INVALID_ARGUMENT = 1,
  GSIK_ERROR_DIMENSION = 2,
  GSIK_ERROR_INDEX = 3,
  GSIK_ERROR_PARSE = 4,
  GSIK_ERROR_SINGULAR = 5,
  GSIK_ERROR_EMPTY_TASK = 6,
  GSIK_ERROR_NON_FINITE = 7,
  GSIK_ERROR_IO = 8,
  GSIK_ERROR_INTERNAL = 9
} gsik_status;

typedef enum gsik_termination {
  GSIK_TERMINATION_MAX_ITERATIONS = 0,
  GSIK_TERMINATION_RESIDUAL = 1,
  GSIK_TERMINATION_DELTA_X = 2,
  GSIK_TERMINATION_STAGNATED = 3,
  /* The frame needed no solve: goals were already met. */
  GSIK_TERMINATION_NONE = 4
} gsik_termination;

typedef enum gsik_foot { GSIK_FOOT_LEFT = 0, GSIK_FOOT_RIGHT = 1 } gsik_foot;

typedef enum gsik_motion_script {
  GSIK_SCRIPT_SMOOTH = 0,
  GSIK_SCRIPT_STATIONARY = 1,
  GSIK_SCRIPT_SPORADIC = 2
} gsik_motion_script;

typedef struct gsik_skeleton gsik_skeleton;
typedef struct gsik_session gsik_session;
typedef struct gsik_service gsik_service;
typedef struct gsik_server gsik_server;

typedef struct gsik_config {
  double damping;             /* added to the diagonal of J^T J, > 0 */
  int max_iterations;         /* Gauss-Seidel sweeps per solve */
  double residual_tol;        /* ||Ax - b|| stop threshold */
  double delta_x_tol;         /* ||dx|| stop threshold */
  double stagnation_tol;      /* | ||dx_k|| - ||dx_k-1|| | stop threshold */
  int max_outer_iterations;   /* Jacobian rebuilds per frame */
  double max_step;            /* per-goal position error clamp, meters */
} gsik_config;

typedef struct gsik_frame_report {
  int ok;
  int outer_iterations;
  int inner_iterations;
  double residual;
  gsik_termination termination;
  double task_error_before;
  double task_error_after;
  double step_norm;
  double solve_seconds;
} gsik_frame_report;

typedef struct gsik_gait_params {
  double step_length;
  double step_height;
  double step_duration;
  double body_sway;
  gsik_foot stance_foot;
} gsik_gait_params;

typedef struct gsik_animation_summary {
  size_t frames;
  int root_swaps;
  double max_joint_speed;
  int limits_respected;
} gsik_animation_summary;

typedef struct gsik_bench_options {
  const int* budgets;
  size_t budget_count;
  int frames;
  gsik_motion_script script;
  uint64_t seed;
  int warm_start;
  gsik_config config;
} gsik_bench_options;

typedef struct gsik_server_options {
  const char* address;     /* NULL means 0.0.0.0 */
  unsigned short port;     /* 0 picks an ephemeral port */
  const char* static_dir;  /* NULL or "" disables static files */
  double tick_hz;
  int threads;
  int handle_signals;      /* nonzero: SIGINT / SIGTERM stop the server */
} gsik_server_options;

GSIK_API const char* gsik_version(void);
GSIK_API const char* gsik_last_error(void);
GSIK_API const char* gsik_status_string(gsik_status status);
GSIK_API const char* gsik_termination_string(gsik_termination termination);
GSIK_API void gsik_string_free(char* s);

/* skeletons */
GSIK_API gsik_status gsik_skeleton_default_biped(gsik_skeleton** out);
GSIK_API gsik_status gsik_skeleton_from_json(const char* json, gsik_skeleton** out);
GSIK_API gsik_status gsik_skeleton_load(const char* path, gsik_skeleton** out);
GSIK_API void gsik_skeleton_free(gsik_skeleton* skeleton);
GSIK_API size_t gsik_skeleton_joint_count(const gsik_skeleton* skeleton);
GSIK_API size_t gsik_skeleton_effector_count(const gsik_skeleton* skeleton);
GSIK_API gsik_status gsik_skeleton_to_json(const gsik_skeleton* skeleton, char** out);

/* configuration */
GSIK_API void gsik_config_default(gsik_config* config);
GSIK_API void gsik_gait_params_default(gsik_gait_params* params);

/* IK sessions */
GSIK_API gsik_status gsik_session_create(const gsik_skeleton* skeleton, gsik_session** out);
GSIK_API void gsik_session_free(gsik_session* session);
GSIK_API gsik_status gsik_session_set_goals_json(gsik_session* session, const char* goals_json);
/* Pins every movable effector at its current position. */
GSIK_API gsik_status gsik_session_pin_effectors(gsik_session* session);
GSIK_API gsik_status gsik_session_solve_frame(gsik_session* session, const gsik_config* config,
                                              gsik_frame_report* report);
GSIK_API size_t gsik_session_joint_count(const gsik_session* session);
GSIK_API gsik_status gsik_session_get_angles(const gsik_session* session, double* angles,
                                             size_t count);
GSIK_API gsik_status gsik_session_set_angles(gsik_session* session, const double* angles,
                                             size_t count);
GSIK_API gsik_status gsik_session_rebase(gsik_session* session, const char* joint_name);
/* {"joints":[names],"angles":[...],"positions":[[x,y,z]...],"effectors":[{...}]} */
GSIK_API gsik_status gsik_session_pose_json(const gsik_session* session, char** out);

/* gait animation export (JSON lines) */
GSIK_API gsik_status gsik_gait_export(const gsik_skeleton* skeleton, const gsik_gait_params* params,
                                      const gsik_config* config, double duration,
                                      double frame_rate, const char* path,
                                      gsik_animation_summary* summary);

/* benchmark: human-readable table and CSV */
GSIK_API void gsik_bench_options_default(gsik_bench_options* options);
GSIK_API gsik_status gsik_bench_run(const gsik_skeleton* skeleton, const gsik_bench_options* options,
                                    char** table, char** csv);

/* live-service protocol, transport-free: JSON text in, JSON array of replies out */
GSIK_API gsik_status gsik_service_create(const gsik_skeleton* skeleton, gsik_service** out);
GSIK_API void gsik_service_free(gsik_service* service);
GSIK_API gsik_status gsik_service_greeting(const gsik_service* service, char** replies);
GSIK_API gsik_status gsik_service_handle(gsik_service* service, const char* message, char** replies);
GSIK_API gsik_status gsik_service_tick(gsik_service* service, double dt, char** replies);

/* WebSocket server */
GSIK_API void gsik_server_options_default(gsik_server_options* options);
GSIK_API gsik_status gsik_server_start(const gsik_skeleton* skeleton, const gsik_server_options* options,
                                       gsik_server** out);
GSIK_API unsigned short gsik_server_port(const gsik_server* server);
GSIK_API uint64_t gsik_server_dropped_ticks(const gsik_server* server);
GSIK_API void gsik_server_wait(gsik_server* server);
GSIK_API void gsik_server_stop(gsik_server* server);
GSIK_API void gsik_server_free(gsik_server* server);

#ifdef __cplusplus
}
#endif

#endif /* GSIK_H */
