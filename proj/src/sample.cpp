#include "qlw/sample.hpp"

#include <cmath>

#include "qlw/errors.hpp"

namespace qlw {

void GoodSample::validate() const {
    const std::string where = good_id.empty() ? std::string() : " (good '" + good_id + "')";
    if (quantity.size() != price.size() || (instrument && instrument->size() != price.size())) {
        throw Error(ErrorKind::InvalidSample, "column lengths differ" + where);
    }
    if (price.size() < 3) {
        throw Error(ErrorKind::InvalidSample, "need at least 3 observations, got " + std::to_string(price.size()) + where);
    }
    for (std::size_t i = 0; i < price.size(); ++i) {
        if (!(std::isfinite(price[i]) && price[i] > 0.0)) {
            throw Error(ErrorKind::InvalidSample, "price must be positive and finite at row " + std::to_string(i) + where);
        }
        if (!(std::isfinite(quantity[i]) && quantity[i] > 0.0)) {
            throw Error(ErrorKind::InvalidSample,
                        "quantity must be positive and finite at row " + std::to_string(i) + where);
        }
        if (instrument && !std::isfinite((*instrument)[i])) {
            throw Error(ErrorKind::InvalidSample, "non-finite instrument at row " + std::to_string(i) + where);
        }
    }
}

std::string_view to_string(IntervalSource source) {
    switch (source) {
        case IntervalSource::Xi: return "xi";
        case IntervalSource::LeastSquares: return "ls";
        case IntervalSource::Intersect: return "intersect";
        case IntervalSource::Box: return "box";
    }
    return "unknown";
}

}  // namespace qlw
