#include "revel/external.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "revel/errors.hpp"

namespace revel {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = shape.empty() ? 0 : 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

[[noreturn]] void fail(const std::string& what) { throw BlackBoxError("external model: " + what); }

}  // namespace

ExternalModel::ExternalModel(const std::string& command, ExternalModelOptions options)
    : options_(options) {
  if (options_.max_batch == 0) options_.max_batch = 1;
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (pipe2(in_pipe, O_CLOEXEC) != 0) fail(std::string("pipe: ") + std::strerror(errno));
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) fail(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    // Own process group, so shutdown also reaches anything the shell forks.
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid_, pid_);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  try {
    const json hello = json::parse(read_line());
    if (!hello.contains("protocol") || hello["protocol"] != 1) fail("unsupported protocol in handshake");
    const long long classes = hello.at("classes").get<long long>();
    if (classes < 2) fail("handshake reports fewer than two classes");
    classes_ = static_cast<std::size_t>(classes);
    for (const auto& d : hello.at("input_shape")) {
      const long long v = d.get<long long>();
      if (v <= 0) fail("handshake has a non-positive input dimension");
      input_shape_.push_back(static_cast<std::size_t>(v));
    }
  } catch (const json::exception& e) {
    shutdown();
    fail(std::string("bad handshake: ") + e.what());
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    // Closing stdin asks the server to exit; give it a moment.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 50 && !reaped; ++i) {
      reaped = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) usleep(10'000);
    }
    kill(-pid_, SIGKILL);
    if (!reaped) waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalModel::write_line(const std::string& line) {
  if (to_child_ < 0) fail("process is not running");
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string ExternalModel::read_line() {
  if (from_child_ < 0) fail("process is not running");
  const auto deadline = Clock::now() + options_.timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) fail("timed out waiting for a response");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) fail("process exited");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<ProbabilityVector> ExternalModel::predict(std::span<const Tensor> inputs) {
  std::lock_guard lock(mutex_);
  std::vector<ProbabilityVector> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += options_.max_batch) {
    const std::size_t n = std::min(options_.max_batch, inputs.size() - start);
    auto part = request(inputs.subspan(start, n));
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<ProbabilityVector> ExternalModel::request(std::span<const Tensor> inputs) {
  const std::size_t expected = element_count(input_shape_);
  json batch = json::array();
  for (const Tensor& t : inputs) {
    if (t.values.size() != expected) {
      throw ShapeError("input has " + std::to_string(t.values.size()) +
                       " values, external model expects " + std::to_string(expected));
    }
    batch.push_back(t.values);
  }
  const std::int64_t id = next_id_++;
  json req = {{"id", id}, {"inputs", std::move(batch)}, {"shape", input_shape_}};
  write_line(req.dump());

  // Until the id matches, a failure leaves the stream out of step with
  // the requests, so the process is dropped.
  json resp;
  try {
    try {
      resp = json::parse(read_line());
    } catch (const json::parse_error& e) {
      fail(std::string("unparseable response: ") + e.what());
    }
    if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_number_integer()) {
      fail("response without an integer id");
    }
    if (resp["id"].get<std::int64_t>() != id) {
      fail("response id " + resp["id"].dump() + " does not echo request id " + std::to_string(id));
    }
  } catch (const BlackBoxError&) {
    shutdown();
    throw;
  }
  if (resp.contains("error")) {
    fail("server error: " + (resp["error"].is_string() ? resp["error"].get<std::string>()
                                                        : resp["error"].dump()));
  }
  if (!resp.contains("probs") || !resp["probs"].is_array()) fail("response without probs");
  const json& rows = resp["probs"];
  if (rows.size() != inputs.size()) {
    fail("response has " + std::to_string(rows.size()) + " rows for " +
         std::to_string(inputs.size()) + " inputs");
  }
  std::vector<ProbabilityVector> out;
  out.reserve(rows.size());
  for (const json& row : rows) {
    if (!row.is_array() || row.size() != classes_) fail("probability row has the wrong length");
    Vector p(static_cast<Eigen::Index>(classes_));
    for (std::size_t j = 0; j < classes_; ++j) {
      if (!row[j].is_number()) fail("non-numeric probability");
      p(static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
    try {
      out.emplace_back(std::move(p), kResponseSumTolerance);
    } catch (const InvalidArgument& e) {
      fail(std::string("malformed probabilities: ") + e.what());
    }
  }
  return out;
}

}  // namespace revel
