#pragma once

#include <stdexcept>
#include <string>

namespace salsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// framing
class CapacityError : public Error { public: using Error::Error; };
class VersionError : public Error { public: using Error::Error; };
class MalformedPduError : public Error { public: using Error::Error; };
class MalformedPayload : public Error { public: using Error::Error; };

// session handling
class AlreadyRegistered : public Error { public: using Error::Error; };
class UnknownMdu : public Error { public: using Error::Error; };

// control
class RiccatiError : public Error { public: using Error::Error; };

// configuration and I/O
class ConfigError : public Error { public: using Error::Error; };
class ConfigKeyError : public ConfigError { public: using ConfigError::ConfigError; };
class ConfigValueError : public ConfigError { public: using ConfigError::ConfigError; };
class IoError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };

} // namespace salsim
