#include "aclab/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "aclab/types.hpp"

namespace aclab {
namespace {

enum Fn1 { kSin, kCos, kTan, kExp, kLog, kSqrt, kAbs, kTanh };
enum Fn2 { kAtan2, kHypot, kMin, kMax, kPowFn };

struct Parser {
    const std::string& s;
    size_t pos = 0;
    std::vector<Expression::Instr> out;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("expression '" + s + "': " + msg + " at offset " + std::to_string(pos));
    }

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) { term(); out.push_back({Expression::Op::Add}); }
            else if (accept('-')) { term(); out.push_back({Expression::Op::Sub}); }
            else break;
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) { unary(); out.push_back({Expression::Op::Mul}); }
            else if (accept('/')) { unary(); out.push_back({Expression::Op::Div}); }
            else break;
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            out.push_back({Expression::Op::Neg});
            return;
        }
        if (accept('+')) {
            unary();
            return;
        }
        power();
    }
    void power() {
        primary();
        if (accept('^')) {
            unary();  // right associative
            out.push_back({Expression::Op::Pow});
        }
    }
    void primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s.c_str() + pos;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos += static_cast<size_t>(end - begin);
            out.push_back({Expression::Op::Const, v});
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
            std::string id = s.substr(start, pos - start);
            if (id == "x") { out.push_back({Expression::Op::VarX}); return; }
            if (id == "y") { out.push_back({Expression::Op::VarY}); return; }
            if (id == "pi") { out.push_back({Expression::Op::Const, kPi}); return; }
            static const std::array<const char*, 8> f1 = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"};
            static const std::array<const char*, 5> f2 = {"atan2", "hypot", "min", "max", "pow"};
            for (size_t k = 0; k < f1.size(); ++k) {
                if (id == f1[k]) {
                    expect('(');
                    expr();
                    expect(')');
                    out.push_back({Expression::Op::Call1, 0.0, static_cast<int>(k)});
                    return;
                }
            }
            for (size_t k = 0; k < f2.size(); ++k) {
                if (id == f2[k]) {
                    expect('(');
                    expr();
                    expect(',');
                    expr();
                    expect(')');
                    out.push_back({Expression::Op::Call2, 0.0, static_cast<int>(k)});
                    return;
                }
            }
            pos = start;
            fail("unknown identifier '" + id + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
    Parser p{text, 0, {}};
    p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    Expression e;
    e.text_ = text;
    e.code_ = std::move(p.out);
    int depth = 0;
    for (const auto& in : e.code_) {
        switch (in.op) {
            case Op::Const: case Op::VarX: case Op::VarY: ++depth; break;
            case Op::Neg: case Op::Call1: break;
            default: --depth; break;
        }
        e.max_depth_ = std::max(e.max_depth_, depth);
    }
    return e;
}

double Expression::eval(double x, double y) const {
    double stack[64];
    double* st = max_depth_ <= 64 ? stack : nullptr;
    std::vector<double> heap;
    if (!st) {
        heap.resize(static_cast<size_t>(max_depth_));
        st = heap.data();
    }
    int top = -1;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: st[++top] = in.value; break;
            case Op::VarX: st[++top] = x; break;
            case Op::VarY: st[++top] = y; break;
            case Op::Add: st[top - 1] += st[top]; --top; break;
            case Op::Sub: st[top - 1] -= st[top]; --top; break;
            case Op::Mul: st[top - 1] *= st[top]; --top; break;
            case Op::Div: st[top - 1] /= st[top]; --top; break;
            case Op::Pow: st[top - 1] = std::pow(st[top - 1], st[top]); --top; break;
            case Op::Neg: st[top] = -st[top]; break;
            case Op::Call1: {
                double& a = st[top];
                switch (in.fn) {
                    case kSin: a = std::sin(a); break;
                    case kCos: a = std::cos(a); break;
                    case kTan: a = std::tan(a); break;
                    case kExp: a = std::exp(a); break;
                    case kLog: a = std::log(a); break;
                    case kSqrt: a = std::sqrt(a); break;
                    case kAbs: a = std::fabs(a); break;
                    case kTanh: a = std::tanh(a); break;
                }
                break;
            }
            case Op::Call2: {
                double b = st[top--];
                double& a = st[top];
                switch (in.fn) {
                    case kAtan2: a = std::atan2(a, b); break;
                    case kHypot: a = std::hypot(a, b); break;
                    case kMin: a = std::min(a, b); break;
                    case kMax: a = std::max(a, b); break;
                    case kPowFn: a = std::pow(a, b); break;
                }
                break;
            }
        }
    }
    return st[top];
}

}  // namespace aclab
