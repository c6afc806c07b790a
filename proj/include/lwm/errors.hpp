#pragma once

#include <stdexcept>
#include <string>

namespace lwm {

// Root of every error the library throws. Callers that only need to know
// "something in the agent stack failed" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LWM_DEFINE_ERROR(Name)            \
    class Name : public Error {           \
    public:                               \
        using Error::Error;               \
    }

LWM_DEFINE_ERROR(InvalidArgument);
LWM_DEFINE_ERROR(ProtocolViolation);
LWM_DEFINE_ERROR(ParseError);
LWM_DEFINE_ERROR(BackendError);
LWM_DEFINE_ERROR(ContractError);
LWM_DEFINE_ERROR(MissingCassette);
LWM_DEFINE_ERROR(SimulationError);
LWM_DEFINE_ERROR(EstimationError);
LWM_DEFINE_ERROR(PlanningError);
LWM_DEFINE_ERROR(UndefinedNormalization);

#undef LWM_DEFINE_ERROR

}  // namespace lwm
