#include "soclearn/errors.hpp"

#include <sstream>

namespace soclearn {

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

NonStochasticRow::NonStochasticRow(std::size_t r, double s)
    : Error("NonStochasticRow",
            "row " + std::to_string(r) + " of the weight matrix sums to " + fmt_double(s)),
      row(r), sum(s) {}

NegativeWeight::NegativeWeight(std::size_t r, std::size_t c, double v)
    : Error("NegativeWeight", "weight (" + std::to_string(r) + ", " + std::to_string(c) +
                                  ") is negative: " + fmt_double(v)),
      row(r), col(c), value(v) {}

InvalidLikelihood::InvalidLikelihood(std::size_t a, std::size_t s, const std::string& why)
    : Error("InvalidLikelihood",
            "likelihood of agent " + std::to_string(a) + ", state " + std::to_string(s) + ": " + why),
      agent(a), state(s), reason(why) {}

NonStochasticJointRow::NonStochasticJointRow(std::size_t s, double total)
    : Error("NonStochasticJointRow",
            "joint likelihood row for state " + std::to_string(s) + " sums to " + fmt_double(total)),
      state(s), sum(total) {}

InvalidBeliefs::InvalidBeliefs(std::size_t a, const std::string& why)
    : Error("InvalidBeliefs", "belief row of agent " + std::to_string(a) + ": " + why), agent(a) {}

ZeroForecastMass::ZeroForecastMass(std::size_t a, std::size_t s, std::size_t t)
    : Error("ZeroForecastMass", "agent " + std::to_string(a) + " observed signal " +
                                    std::to_string(s) + " with zero forecast probability at step " +
                                    std::to_string(t)),
      agent(a), signal(s), step(t) {}

NormalizationDrift::NormalizationDrift(std::size_t a, double s)
    : Error("NormalizationDrift",
            "belief row of agent " + std::to_string(a) + " drifted to sum " + fmt_double(s)) {}

EmptyComparisonSet::EmptyComparisonSet(std::size_t a)
    : Error("EmptyComparisonSet", "every state is observationally equivalent to the true state for agent " +
                                      std::to_string(a)) {}

ParseError::ParseError(std::string where, const std::string& message)
    : Error("ParseError", where + ": " + message), location(std::move(where)) {}

ValidationError::ValidationError(std::string f, std::string why)
    : Error("ValidationError", f + ": " + why), field(std::move(f)), reason(std::move(why)) {}

} // namespace soclearn
