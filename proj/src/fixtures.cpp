#include "soclearn/config.hpp"

namespace soclearn {

namespace {

// Two agents, three states, the coin likelihood of the motivating example:
// no single signal separates the truth from both alternatives.
constexpr std::string_view kExample1 = R"({
  "name": "example1",
  "description": "Two strongly connected agents, coin likelihoods with no single revealing signal",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "mode": "independent",
    "shared": {
      "alphabet": ["H", "T"],
      "likelihood": [["1/3", "2/3"], ["1/4", "3/4"], ["3/5", "2/5"]]
    }
  },
  "network": {"weights": [[0.5, 0.5], [0.5, 0.5]]},
  "initial_beliefs": "uniform",
  "horizon": 2000,
  "seeds": {"count": 200, "base": 1},
  "analysis": {"watch_sequences": {"all": [["H", "T", "T"]]}, "epsilon": 1e-3, "window": 50},
  "acceptance": {"require": ["forecast_tv", "kstep_error"], "min_pass_fraction": 0.95}
}
)";

// Same model run long enough for 95% of seeds to push mu(theta*) past 0.99:
// the linear update contracts at roughly 3e-3 per step here.
constexpr std::string_view kExample1Learning = R"({
  "name": "example1_learning",
  "description": "Example 1 with a horizon long enough for asymptotic learning to show",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "mode": "independent",
    "shared": {
      "alphabet": ["H", "T"],
      "likelihood": [["1/3", "2/3"], ["1/4", "3/4"], ["3/5", "2/5"]]
    }
  },
  "network": {"weights": [[0.5, 0.5], [0.5, 0.5]]},
  "initial_beliefs": "uniform",
  "horizon": 4000,
  "seeds": {"count": 200, "base": 1},
  "record": {"stride": 10},
  "analysis": {"watch_sequences": {"all": [["H", "T", "T"]]}, "epsilon": 1e-3, "window": 50},
  "acceptance": {"require": ["forecast_tv", "kstep_error", "learned"], "min_pass_fraction": 0.95}
}
)";

// Agent 1 listens only to itself and its signals are uninformative; the graph
// is not strongly connected.
constexpr std::string_view kDisconnected = R"({
  "name": "disconnected",
  "description": "Only agent 0 can tell the states apart and agent 1 ignores it",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "agents": [
      {"alphabet": ["H", "T"], "likelihood": [["1/3", "2/3"], ["1/4", "3/4"], ["3/5", "2/5"]]},
      {"alphabet": ["H", "T"], "likelihood": [["1/2", "1/2"], ["1/2", "1/2"], ["1/2", "1/2"]]}
    ]
  },
  "network": {"weights": [[0.5, 0.5], [0, 1]]},
  "initial_beliefs": "uniform",
  "horizon": 2000,
  "seeds": {"count": 50, "base": 1}
}
)";

constexpr std::string_view kZeroGrain = R"({
  "name": "zero_grain",
  "description": "Nobody puts prior mass on the true state",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "shared": {"alphabet": ["H", "T"], "likelihood": [["1/3", "2/3"], ["1/4", "3/4"], ["3/5", "2/5"]]}
  },
  "network": {"weights": [[0.5, 0.5], [0.5, 0.5]]},
  "initial_beliefs": "zero_on_true",
  "horizon": 2000,
  "seeds": {"count": 50, "base": 1}
}
)";

constexpr std::string_view kNoSelfReliance = R"({
  "name": "no_self_reliance",
  "description": "Informative signals but every agent ignores its own posterior",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "shared": {"alphabet": ["H", "T"], "likelihood": [["1/3", "2/3"], ["1/4", "3/4"], ["3/5", "2/5"]]}
  },
  "network": {"weights": [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]},
  "initial_beliefs": [[0.7, 0.2, 0.1], [0.1, 0.3, 0.6], [0.2, 0.5, 0.3]],
  "horizon": 2000,
  "seeds": {"count": 50, "base": 1}
}
)";

// theta1 has the same likelihood as the truth for every agent.
constexpr std::string_view kIndistinguishable = R"({
  "name": "indistinguishable",
  "description": "theta1 is observationally equivalent to the truth for all agents",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "shared": {"alphabet": ["H", "T"], "likelihood": [["1/3", "2/3"], ["1/3", "2/3"], ["3/5", "2/5"]]}
  },
  "network": {"weights": [[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]]},
  "initial_beliefs": [[0.6, 0.1, 0.3], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]],
  "horizon": 2000,
  "seeds": {"count": 100, "base": 1},
  "acceptance": {"require": ["consensus"]}
}
)";

// Both agents see the same coin flip each period; marginals match example1.
constexpr std::string_view kCorrelated = R"({
  "name": "correlated",
  "description": "Perfectly correlated signals sampled from a joint table",
  "states": {"labels": ["theta*", "theta1", "theta2"], "true_state": 0},
  "signals": {
    "mode": "joint",
    "joint": {
      "alphabet_sizes": [2, 2],
      "alphabets": [["H", "T"], ["H", "T"]],
      "table": [["1/3", 0, 0, "2/3"], ["1/4", 0, 0, "3/4"], ["3/5", 0, 0, "2/5"]]
    }
  },
  "network": {"weights": [[0.5, 0.5], [0.5, 0.5]]},
  "initial_beliefs": "uniform",
  "horizon": 2000,
  "seeds": {"count": 200, "base": 1},
  "analysis": {"watch_sequences": {"all": [["H", "T", "T"]]}}
}
)";

} // namespace

const std::vector<Fixture>& bundled_fixtures() {
    static const std::vector<Fixture> fixtures{
        {"example1", kExample1},
        {"example1_learning", kExample1Learning},
        {"disconnected", kDisconnected},
        {"zero_grain", kZeroGrain},
        {"no_self_reliance", kNoSelfReliance},
        {"indistinguishable", kIndistinguishable},
        {"correlated", kCorrelated},
    };
    return fixtures;
}

} // namespace soclearn
