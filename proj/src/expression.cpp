#include "beamlab/expression.hpp"

#include "beamlab/errors.hpp"
#include "beamlab/spectral.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace beamlab {
namespace {

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    double run() {
        double v = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return v;
    }

  private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ConfigError("bad expression \"" + text_ + "\": " + what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double expr() {
        double v = term();
        for (;;) {
            if (consume('+')) v += term();
            else if (consume('-')) v -= term();
            else return v;
        }
    }

    double term() {
        double v = factor();
        for (;;) {
            if (consume('*')) v *= factor();
            else if (consume('/')) {
                double d = factor();
                if (d == 0.0) fail("division by zero");
                v /= d;
            } else return v;
        }
    }

    double factor() {
        if (consume('-')) return -factor();
        if (consume('+')) return factor();
        return primary();
    }

    double primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            double v = expr();
            if (!consume(')')) fail("missing ')'");
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalpha(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "pi") return pi;
            if (name == "sqrt") {
                if (!consume('(')) fail("sqrt needs '('");
                double v = expr();
                if (!consume(')')) fail("missing ')'");
                if (v < 0.0) fail("sqrt of negative value");
                return std::sqrt(v);
            }
            fail("unknown identifier \"" + name + "\"");
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("invalid number");
            pos_ += static_cast<std::size_t>(end - begin);
            return v;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

double evaluate_expression(const std::string& text) {
    return Parser(text).run();
}

} // namespace beamlab
