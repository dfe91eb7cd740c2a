#pragma once

#include <stdexcept>
#include <string>

namespace genprior {

/// Broad failure classes. The CLI maps each to a distinct exit code.
enum class ErrorKind { Invalid, Config, Io, Infeasible };

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what)
{
    throw Error(ErrorKind::Invalid, what);
}

[[noreturn]] inline void fail_io(const std::string& what)
{
    throw Error(ErrorKind::Io, what);
}

[[noreturn]] inline void fail_config(const std::string& what)
{
    throw Error(ErrorKind::Config, what);
}

[[noreturn]] inline void fail_infeasible(const std::string& what)
{
    throw Error(ErrorKind::Infeasible, what);
}

}  // namespace genprior
