#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmcq/analysis.hpp"
#include "fmcq/error.hpp"
#include "fmcq/formula.hpp"
#include "fmcq/io.hpp"
#include "fmcq/model.hpp"
#include "fmcq/representations.hpp"

namespace fmcq {

using Json = nlohmann::json;

inline constexpr int kApiVersion = 1;

/// Malformed request content; problems lists every offending item.
class RequestError : public Error {
 public:
  RequestError(const std::string& what, std::vector<std::string> problems = {})
      : Error(what), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Representation selector shared by the service and the CLI.
enum class ReprChoice { kAllConfigs, kPerFeature, kPerConstraint, kCsp };

/// Accepts "all", "all-configs", "per-feature", "per-constraint", "csp".
ReprChoice parse_repr(std::string_view name);
std::string_view to_string(ReprChoice r);

/// Parses "f=1,g=0" (whitespace tolerated). Unknown ids are left for resolve().
Requirements parse_requirements(std::string_view text);

/// A loaded model with lazily built, shared read-only representations.
class ModelEntry {
 public:
  ModelEntry(std::string id, std::string name, FeatureModel fm);

  const std::string& id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  const FeatureModel& model() const noexcept { return cf_.model(); }
  const ConstraintSet& constraints() const noexcept { return cf_; }
  const AnalysisResult& analysis() const;

  /// Throws CapacityError for all-configs above the threshold; null for csp.
  std::shared_ptr<const Representation> representation(ReprChoice r) const;

 private:
  std::string id_;
  std::string name_;
  ConstraintSet cf_;
  mutable std::mutex mu_;
  mutable std::optional<AnalysisResult> analysis_;
  mutable std::map<ReprChoice, std::shared_ptr<const Representation>> reprs_;
};

struct ServiceOptions {
  std::chrono::minutes session_ttl{30};
  /// Remaining-configuration counts stop here and are reported as inexact.
  std::uint64_t count_cap = 1'000'000;
  std::size_t max_diagnoses = 10;
  std::function<std::chrono::steady_clock::time_point()> clock = [] { return std::chrono::steady_clock::now(); };
};

/// Request handlers over JSON values. Every response carries api_version.
/// Errors: NotFound (unknown model, session or feature), RequestError
/// (malformed body or requirements), CapacityError, and parse errors from
/// model upload.
class Service {
 public:
  explicit Service(ServiceOptions options = {});

  /// Registers a model and returns its id.
  std::string add_model(FeatureModel fm, std::string name = "");
  std::shared_ptr<const ModelEntry> model(const std::string& id) const;

  /// POST /models: body is a model document (SXFM or native).
  Json handle_upload(const std::string& document, std::optional<ModelFormat> format = std::nullopt,
                     std::string name = "");
  /// GET /models/{id}
  Json handle_model(const std::string& model_id) const;
  /// POST /models/{id}/solve {repr, cr, limit, projection, count}
  Json handle_solve(const std::string& model_id, const Json& body) const;
  /// POST /models/{id}/count {repr, cr}
  Json handle_count(const std::string& model_id, const Json& body) const;
  /// POST /models/{id}/diagnose {cr, max}
  Json handle_diagnose(const std::string& model_id, const Json& body) const;
  /// GET /models/{id}/analysis
  Json handle_analysis(const std::string& model_id) const;

  /// POST /sessions {model_id, repr}
  Json handle_create_session(const Json& body);
  /// POST /sessions/{id}/step {set: {feature: value}} | {unset: feature}
  Json handle_step(const std::string& session_id, const Json& body);
  /// GET /sessions/{id}
  Json handle_session(const std::string& session_id);

  /// StepResponse for (model, cr): a pure function of its inputs.
  Json evaluate_state(const ModelEntry& entry, ReprChoice repr, const Requirements& cr) const;

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t expire_idle();
  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    std::shared_ptr<const ModelEntry> entry;
    ReprChoice repr = ReprChoice::kPerFeature;
    Requirements cr;
    std::uint64_t seq = 0;
    bool consistent = true;
    std::chrono::steady_clock::time_point last_used;
    std::mutex mu;
  };

  std::shared_ptr<Session> session(const std::string& id);

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ModelEntry>> models_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_model_ = 1;
  std::uint64_t next_session_ = 1;
};

/// Maps a library exception to an HTTP status and JSON error body.
std::pair<int, Json> error_response(const std::exception& e);

/// HTTP front end over a Service (cpp-httplib).
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (0 picks a free port) and returns the bound port.
  /// Throws Error when binding fails.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fmcq
