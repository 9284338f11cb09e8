#pragma once

#include <string>
#include <vector>

namespace aclab {

// Scalar expression in the variables x and y, compiled to a postfix program.
// Grammar: + - * / ^, unary minus, parentheses, numbers, pi, and the
// functions sin cos tan tanh exp log sqrt abs atan2 hypot min max pow.
class Expression {
public:
    static Expression parse(const std::string& text);

    double eval(double x, double y) const;
    const std::string& text() const { return text_; }

    enum class Op { Const, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Call1, Call2 };
    struct Instr {
        Op op;
        double value = 0.0;
        int fn = 0;
    };

private:
    std::string text_;
    std::vector<Instr> code_;
    int max_depth_ = 0;
};

}  // namespace aclab
