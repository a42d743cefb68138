// Test double for the external black-box protocol. Serves a fixed
// softmax-linear model over flat inputs of length --dim, and can be told to
// misbehave in one of several ways.
//
//   fake_model_server [--classes C] [--dim D] [--mode M] [--after K] [--log FILE]
//
// Modes: ok, garbage, badsum, wrongid, error, exit, hang, badhandshake,
// shortrows. --after K serves K good responses before misbehaving.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

using nlohmann::json;

namespace {

// Same formula as fake_weight() in external_test.cpp.
double weight(std::size_t i, std::size_t j, std::size_t classes) {
  return std::sin(static_cast<double>(i * classes + j + 1));
}

std::vector<double> predict(const std::vector<double>& x, std::size_t classes) {
  std::vector<double> logits(classes, 0.0);
  for (std::size_t j = 0; j < classes; ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) logits[j] += weight(i, j, classes) * x[i];
  }
  double hi = logits[0];
  for (double l : logits) hi = std::max(hi, l);
  double total = 0.0;
  for (double& l : logits) total += (l = std::exp(l - hi));
  for (double& l : logits) l /= total;
  return logits;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t classes = 3;
  std::size_t dim = 4;
  std::string mode = "ok";
  long after = 0;
  std::string log_path;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    const std::string value = argv[i + 1];
    if (key == "--classes") classes = std::stoul(value);
    else if (key == "--dim") dim = std::stoul(value);
    else if (key == "--mode") mode = value;
    else if (key == "--after") after = std::stol(value);
    else if (key == "--log") log_path = value;
  }

  if (mode == "badhandshake") {
    std::cout << "{\"protocol\": 2, \"classes\": " << classes << ", \"input_shape\": [" << dim << "]}" << std::endl;
  } else {
    std::cout << json{{"protocol", 1}, {"classes", classes}, {"input_shape", {dim}}}.dump() << std::endl;
  }

  std::ofstream log;
  if (!log_path.empty()) log.open(log_path);

  long served = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception&) {
      std::cout << json{{"id", nullptr}, {"error", "malformed request"}}.dump() << std::endl;
      continue;
    }
    const json id = req.value("id", json(nullptr));
    const json& inputs = req["inputs"];
    if (log) log << inputs.size() << std::endl;

    const bool misbehave = served >= after && mode != "ok";
    ++served;
    if (misbehave) {
      if (mode == "exit") return 0;
      if (mode == "hang") {
        std::this_thread::sleep_for(std::chrono::hours(1));
        return 0;
      }
      if (mode == "garbage") {
        std::cout << "this is not json" << std::endl;
        continue;
      }
      if (mode == "error") {
        std::cout << json{{"id", id}, {"error", "model exploded"}}.dump() << std::endl;
        continue;
      }
    }

    json probs = json::array();
    for (const json& input : inputs) {
      std::vector<double> x = input.get<std::vector<double>>();
      if (x.size() != dim) {
        std::cout << json{{"id", id}, {"error", "bad input length"}}.dump() << std::endl;
        probs = nullptr;
        break;
      }
      std::vector<double> p = predict(x, classes);
      if (misbehave && mode == "badsum") p[0] += 0.01;
      if (misbehave && mode == "shortrows") p.pop_back();
      probs.push_back(p);
    }
    if (probs.is_null()) continue;
    json resp{{"id", id}, {"probs", probs}};
    if (misbehave && mode == "wrongid") resp["id"] = id.get<long long>() + 100;
    std::cout << resp.dump() << std::endl;
  }
  return 0;
}
