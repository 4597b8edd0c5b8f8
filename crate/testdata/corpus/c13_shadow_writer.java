class ShadowWriter {
    void write(String p) {
    }

    public void run(long size) {
        String label = "x";
        if (label.isEmpty()) {
            return;
        }
        {
            String size = label;
            // <start>
            write(out);
            // <end>
        }
    }
}
