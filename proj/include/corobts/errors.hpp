#pragma once

#include <stdexcept>
#include <string>

namespace corobts {

// Faults raised by the library. Each maps onto a standard exception family so
// callers that do not care about the distinction can catch the std base.

struct precondition_fault : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct degree_fault : std::logic_error {
    using std::logic_error::logic_error;
};

struct height_fault : std::logic_error {
    using std::logic_error::logic_error;
};

struct navigation_fault : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct invariant_fault : std::logic_error {
    using std::logic_error::logic_error;
};

struct finger_fault : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace corobts
