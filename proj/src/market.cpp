#include "markedtime/market.hpp"

#include <sstream>

namespace markedtime {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "; " : "") << items[i];
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

std::vector<std::string> MarketSpec::problems() const {
    std::vector<std::string> out;
    if (!(sigma > 0.0)) out.push_back("sigma must be > 0");
    if (!(lambda > 0.0)) out.push_back("lambda must be > 0");
    if (!(barrier > 0.0 && barrier < 1.0)) out.push_back("barrier must lie in (0, 1), below S1_0 = 1");
    if (!(T > 0.0)) out.push_back("T must be > 0");
    if (!(T_prime > T)) out.push_back("T_prime must be > T");
    else if (!(T_prime - T >= effective_margin()))
        out.push_back("T_prime - T must be at least the horizon margin");
    if (!(x0 > 0.0)) out.push_back("x0 must be > 0");
    return out;
}

void MarketSpec::validate() const {
    auto found = problems();
    if (!found.empty()) throw ValidationError(std::move(found));
}

TimeGrid::TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("TimeGrid: horizon must be finite and >= 0");
    if (n_steps < 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 0");
    if (n_steps > 0 && horizon == 0.0) throw std::invalid_argument("TimeGrid: positive n_steps needs a positive horizon");
}

}  // namespace markedtime
