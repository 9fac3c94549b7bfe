import sys, numpy as np
from concurrent.futures import ThreadPoolExecutor
from pcrnn import corpus, network
from pcrnn.clones import full_sweep

src, out_csv, extra = sys.argv[1], sys.argv[2], int(sys.argv[3])
params = network.load_checkpoint(src + "/final.ckpt")
text = corpus.load_moby_excerpt()
vocab = corpus.build_vocabulary(text)
seq = corpus.encode(text, vocab)
oh = corpus.one_hot_matrix(seq, 42)
pool = ThreadPoolExecutor(4)
with open(out_csv, "w") as fh:
    fh.write("iteration,history_level,mean_loss\n")
    for i in range(101, 101 + extra):
        rec = full_sweep(params, seq, 42, 499, 1.0, pool, oh)
        for h, v in enumerate(rec):
            fh.write(f"{i},{h},{v:.17g}\n")
        fh.flush()
        print(i, rec.sum(), flush=True)
network.save_checkpoint(params, src + "/final_300.ckpt")
