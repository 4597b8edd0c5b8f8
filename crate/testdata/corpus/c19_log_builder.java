class LogBuilder {
    private StringBuilder mBuilder;
    private String mLog;

    private void start(String header) {
        mBuilder.append(header);
        mLog = mLog.trim();
    }

    public void record(String line) {
        // <start>
        buf.append(line);
        buf.append(line);
        String s = buf.toString();
        // <end>
    }
}
