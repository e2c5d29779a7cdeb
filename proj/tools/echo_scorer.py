#!/usr/bin/env python3
"""Reference scorer peer: answers the line protocol with a uniform
distribution over a fixed vocabulary.

  echo_scorer.py --vocab "a b c </s>"                 # stdio
  echo_scorer.py --vocab "a b c </s>" --port 0        # TCP, prints the port
  echo_scorer.py --vocab "a b" --die-after 5          # exit after 5 requests
"""
import argparse
import math
import socket
import sys


def serve(lines, write, vocab, die_after):
    lp = -math.log(len(vocab))
    dist = " ".join(f"{tok} {lp!r}" for tok in vocab)
    next_state = 0
    live = set()
    handled = 0
    for raw in lines:
        line = raw.rstrip("\n")
        if not line:
            continue
        if die_after is not None and handled >= die_after:
            return
        handled += 1
        cmd, _, rest = line.partition(" ")
        if cmd in ("INIT", "ADV"):
            if cmd == "ADV" and int(rest.split("|||")[0]) not in live:
                write(f"ERR unknown state {rest.split('|||')[0].strip()}")
                continue
            live.add(next_state)
            write(f"OK {next_state}")
            next_state += 1
        elif cmd == "DIST":
            state = int(rest)
            if state not in live:
                write(f"ERR unknown state {state}")
            else:
                write(f"DIST {state} ||| {dist} ||| DEFAULT {lp!r}")
        elif cmd == "FREE":
            live.discard(int(rest))
            write("OK")
        else:
            write(f"ERR unknown command {cmd}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vocab", required=True, help="space-separated tokens, EOS included")
    ap.add_argument("--port", type=int, help="serve one TCP client on this port (0 picks one)")
    ap.add_argument("--die-after", type=int, help="exit after this many requests")
    args = ap.parse_args()
    vocab = args.vocab.split()

    if args.port is None:
        def write(msg):
            sys.stdout.write(msg + "\n")
            sys.stdout.flush()
        serve(sys.stdin, write, vocab, args.die_after)
        return

    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind(("127.0.0.1", args.port))
    srv.listen(1)
    print(srv.getsockname()[1], flush=True)
    conn, _ = srv.accept()
    with conn, conn.makefile("r", encoding="utf-8") as rf:
        serve(rf, lambda msg: conn.sendall((msg + "\n").encode()), vocab, args.die_after)


if __name__ == "__main__":
    main()
