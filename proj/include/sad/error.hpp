#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sad {

/// Machine-readable error category. The CLI maps these onto exit codes and
/// the `kind=` field of its one-line error message.
enum class ErrorKind {
    config,      // invalid or missing configuration
    validation,  // configuration is well-formed but violates an experiment rule
    domain,      // argument outside the mathematical domain of an operation
    shape,       // tensor shape mismatch
    contract,    // wiring violation (e.g. spf features fed to an inv-only head)
    data,        // malformed dataset content
    io,          // filesystem / codec failure
    numeric,     // non-finite values during training
    unsupported, // recognised but unimplemented feature
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define SAD_DEFINE_ERROR(Name, Kind)                                   \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what) : Error(Kind, what) {}  \
    }

SAD_DEFINE_ERROR(ConfigError, ErrorKind::config);
SAD_DEFINE_ERROR(ValidationError, ErrorKind::validation);
SAD_DEFINE_ERROR(DomainError, ErrorKind::domain);
SAD_DEFINE_ERROR(ShapeError, ErrorKind::shape);
SAD_DEFINE_ERROR(ContractError, ErrorKind::contract);
SAD_DEFINE_ERROR(DataError, ErrorKind::data);
SAD_DEFINE_ERROR(IoError, ErrorKind::io);
SAD_DEFINE_ERROR(NumericError, ErrorKind::numeric);
SAD_DEFINE_ERROR(UnsupportedError, ErrorKind::unsupported);

#undef SAD_DEFINE_ERROR

} // namespace sad
