#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <sys/types.h>

#include "revel/blackbox.hpp"

namespace revel {

struct ExternalModelOptions {
  std::chrono::milliseconds timeout{60'000};
  /// Inputs per request line; larger batches are split.
  std::size_t max_batch = 256;
};

/// Black box served by a child process speaking the line-delimited JSON
/// protocol on its stdin/stdout:
///
///   handshake: {"protocol": 1, "classes": C, "input_shape": [dims]}
///   request:   {"id": n, "inputs": [[...], ...], "shape": [dims]}
///   response:  {"id": n, "probs": [[p_1..p_C], ...]}
///   error:     {"id": n, "error": "message"}
///
/// Responses must echo the request id and arrive in order. Probability rows
/// that do not sum to one within 1e-6 are rejected, never renormalized.
class ExternalModel final : public BlackBox {
 public:
  static constexpr double kResponseSumTolerance = 1e-6;

  /// Starts `command` through /bin/sh and reads the handshake.
  explicit ExternalModel(const std::string& command, ExternalModelOptions options = {});
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  std::size_t class_count() const override { return classes_; }
  std::vector<ProbabilityVector> predict(std::span<const Tensor> inputs) override;
  std::string kind() const override { return "external"; }

  const std::vector<std::size_t>& input_shape() const { return input_shape_; }

 private:
  std::vector<ProbabilityVector> request(std::span<const Tensor> inputs);
  void write_line(const std::string& line);
  std::string read_line();
  void shutdown();

  ExternalModelOptions options_;
  std::mutex mutex_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::size_t classes_ = 0;
  std::vector<std::size_t> input_shape_;
  std::int64_t next_id_ = 1;
};

}  // namespace revel
