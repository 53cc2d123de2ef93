#!/usr/bin/env python3
"""Independent JSON canonicalization (RFC 8785) oracle.

Test-only. Produces the frozen expected values used by the C++ canonical
and sealing tests. Number formatting goes through Python's repr (shortest
round-trip) and is reshaped into the ECMAScript Number-to-String layout;
strings and key ordering follow the RFC directly.
"""
import hashlib
import json
import math
import sys


def es_number(x):
    if isinstance(x, bool):
        raise TypeError("bool is not a number")
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite")
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    r = repr(abs(x))
    if "e" in r:
        mant, exp = r.split("e")
        exp = int(exp)
    else:
        mant, exp = r, 0
    if "." in mant:
        ip, fp = mant.split(".")
    else:
        ip, fp = mant, ""
    digits = (ip + fp).lstrip("0")
    # position of decimal point relative to the start of `digits`
    lead_zeros = len(ip + fp) - len((ip + fp).lstrip("0"))
    n = len(ip) - lead_zeros + exp
    digits = digits.rstrip("0")
    k = len(digits)
    if k <= n <= 21:
        return sign + digits + "0" * (n - k)
    if 0 < n <= 21:
        return sign + digits[:n] + "." + digits[n:]
    if -6 < n <= 0:
        return sign + "0." + "0" * (-n) + digits
    e = n - 1
    es = ("+" if e >= 0 else "-") + str(abs(e))
    if k == 1:
        return sign + digits + "e" + es
    return sign + digits[0] + "." + digits[1:] + "e" + es


def es_string(s):
    out = ['"']
    for ch in s:
        c = ord(ch)
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\b":
            out.append("\\b")
        elif ch == "\f":
            out.append("\\f")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif c < 0x20:
            out.append("\\u%04x" % c)
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def utf16_key(s):
    return s.encode("utf-16-be")


def canon(v):
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, (int, float)):
        return es_number(v)
    if isinstance(v, str):
        return es_string(v)
    if isinstance(v, list):
        return "[" + ",".join(canon(e) for e in v) + "]"
    if isinstance(v, dict):
        keys = sorted(v.keys(), key=utf16_key)
        return "{" + ",".join(es_string(k) + ":" + canon(v[k]) for k in keys) + "}"
    raise TypeError(type(v))


NUMBER_CASES = [
    "1.0", "1", "-0", "0.0", "100", "1e2", "1E2", "4.50", "0.000001", "0.0000001",
    "1e21", "1e20", "123456789012345680000", "1.7976931348623157e308",
    "5e-324", "-1.5e-7", "9007199254740992", "9007199254740993", "0.1", "333333333.33333329",
    "1e+23", "2.5e-5", "12345678901234567890123", "-42", "1.5e300",
]


def main():
    if len(sys.argv) > 1 and sys.argv[1] == "numbers":
        for text in NUMBER_CASES:
            print(f'{{"{text}", "{canon(json.loads(text))}"}},')
        return
    if len(sys.argv) > 2 and sys.argv[1] == "file":
        with open(sys.argv[2], encoding="utf-8") as f:
            doc = json.load(f)
        c = canon(doc).encode("utf-8")
        print(c.decode("utf-8"))
        print(hashlib.sha256(c).hexdigest())
        return
    doc = json.load(sys.stdin)
    c = canon(doc).encode("utf-8")
    sys.stdout.write(c.decode("utf-8") + "\n" + hashlib.sha256(c).hexdigest() + "\n")


if __name__ == "__main__":
    main()
