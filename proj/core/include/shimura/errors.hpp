#ifndef SHIMURA_ERRORS_HPP
#define SHIMURA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace shimura {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SHIMURA_DEFINE_ERROR(Name)                         \
    struct Name : Error {                                  \
        explicit Name(const std::string& what = #Name)     \
            : Error(std::string(#Name) + ": " + what) {}   \
    }

SHIMURA_DEFINE_ERROR(NonFundamentalDiscriminant);
SHIMURA_DEFINE_ERROR(NotTotallyReal);
SHIMURA_DEFINE_ERROR(NotSquarefree);
SHIMURA_DEFINE_ERROR(NotCoprime);
SHIMURA_DEFINE_ERROR(ParityViolation);
SHIMURA_DEFINE_ERROR(NotAdmissible);
SHIMURA_DEFINE_ERROR(NonIntegralClassNumber);
SHIMURA_DEFINE_ERROR(NonIntegralCount);
SHIMURA_DEFINE_ERROR(UnitSearchInconclusive);
SHIMURA_DEFINE_ERROR(PrecisionTooLow);
SHIMURA_DEFINE_ERROR(InternalInconsistency);
SHIMURA_DEFINE_ERROR(ParseError);
SHIMURA_DEFINE_ERROR(CountMismatch);
SHIMURA_DEFINE_ERROR(NotFound);
SHIMURA_DEFINE_ERROR(AmbiguousIdeal);

#undef SHIMURA_DEFINE_ERROR

} // namespace shimura

#endif
